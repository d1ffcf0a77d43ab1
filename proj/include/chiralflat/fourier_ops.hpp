#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "chiralflat/errors.hpp"
#include "chiralflat/potential.hpp"
#include "chiralflat/truncation.hpp"

namespace chiralflat {

using SpMat = Eigen::SparseMatrix<Complex>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

constexpr double kDiracTol = 1e-6;

/// Distance of k from the Dirac set K0 = (K + Lambda*) u (-K + Lambda*).
inline double dirac_distance(Complex k) {
    double best = std::abs(k - lat::K);
    for (int s = -1; s <= 1; s += 2) {
        // coordinates of k - s*K in the (q1, q2) frame
        const Complex d = k - double(s) * lat::K;
        const double x = lat::pairing(d, 1.0) / (2.0 * M_PI);          // <d, q1-dual...>
        // Solve d = a q1 + b q2 via the real 2x2 system.
        const double a = d.real() / lat::q1.real();
        const double b = (d.imag() - a * lat::q1.imag()) / lat::q2.imag();
        (void)x;
        for (std::int64_t da = -1; da <= 1; ++da)
            for (std::int64_t db = -1; db <= 1; ++db) {
                const Complex p = lat::dual_point(std::llround(a) + da, std::llround(b) + db);
                best = std::min(best, std::abs(d - p));
            }
    }
    return best;
}

inline void require_admissible(Complex k) {
    if (dirac_distance(k) < kDiracTol)
        throw near_dirac_point("k within " + std::to_string(kDiracTol) +
                               " of a Dirac point; resolvent undefined");
}

/// Diagonal of R(k) = (2 D_zbar - k)^{-1} on one sector: entries 1/(nu - k).
inline Vec resolvent_diag(Complex k, const SectorModes& modes) {
    require_admissible(k);
    Vec d(modes.dim());
    for (int i = 0; i < modes.dim(); ++i) d(i) = 1.0 / (modes.mode(i).value() - k);
    return d;
}

enum class Which { U_plus, U_minus };

/// Sparse matrix of multiplication by U_+ (sector +K -> -K) or U_-
/// (sector -K -> +K). Shifted targets outside the truncation are dropped;
/// that boundary leakage vanishes as N grows and is covered by the
/// convergence tests.
inline SpMat potential_matrix(const FourierPotential& pot, const SectorPair& sp, Which which) {
    std::vector<Eigen::Triplet<Complex>> trip;
    if (which == Which::U_plus) {
        // (+K, m, n) + (K + a q1 + b q2) = (-K, m + a + 2, n + b - 1)
        trip.reserve(pot.plus.size() * static_cast<std::size_t>(sp.plus.dim()));
        for (int j = 0; j < sp.plus.dim(); ++j) {
            const auto& mi = sp.plus.mode(j);
            for (const auto& [k, c] : pot.plus) {
                const int t = sp.minus.find(mi.m + k.first + 2, mi.n + k.second - 1);
                if (t >= 0) trip.emplace_back(t, j, c.numeric);
            }
        }
        SpMat M(sp.minus.dim(), sp.plus.dim());
        M.setFromTriplets(trip.begin(), trip.end());
        return M;
    }
    // (-K, m, n) + (-K + a q1 + b q2) = (+K, m + a - 2, n + b + 1)
    trip.reserve(pot.minus.size() * static_cast<std::size_t>(sp.minus.dim()));
    for (int j = 0; j < sp.minus.dim(); ++j) {
        const auto& mi = sp.minus.mode(j);
        for (const auto& [k, c] : pot.minus) {
            const int t = sp.plus.find(mi.m + k.first - 2, mi.n + k.second + 1);
            if (t >= 0) trip.emplace_back(t, j, c.numeric);
        }
    }
    SpMat M(sp.plus.dim(), sp.minus.dim());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

/// T_k = R(k) V as the full two-sector block matrix
/// [[0, R_-(k) U_+], [R_+(k) U_-, 0]].
inline SpMat build_Tk(const FourierPotential& pot, Complex k, const SectorPair& sp) {
    const Vec rm = resolvent_diag(k, sp.minus);
    const Vec rp = resolvent_diag(k, sp.plus);
    const SpMat Mp = potential_matrix(pot, sp, Which::U_plus);
    const SpMat Mm = potential_matrix(pot, sp, Which::U_minus);
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(Mp.nonZeros() + Mm.nonZeros()));
    const int dm = sp.minus.dim();
    for (int col = 0; col < Mp.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mp, col); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), dm + col, rm(it.row()) * it.value());
    for (int col = 0; col < Mm.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mm, col); it; ++it)
            trip.emplace_back(dm + static_cast<int>(it.row()), col, rp(it.row()) * it.value());
    SpMat T(sp.dim(), sp.dim());
    T.setFromTriplets(trip.begin(), trip.end());
    return T;
}

/// A_k = R(k) U_+ R(k) U_- on the component-1 sector (the first diagonal
/// block of T_k^2).
inline SpMat build_Ak(const FourierPotential& pot, Complex k, const SectorPair& sp) {
    const Vec rm = resolvent_diag(k, sp.minus);
    const Vec rp = resolvent_diag(k, sp.plus);
    SpMat Mp = potential_matrix(pot, sp, Which::U_plus);
    SpMat Mm = potential_matrix(pot, sp, Which::U_minus);
    // scale rows by the resolvents
    for (int col = 0; col < Mp.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mp, col); it; ++it) it.valueRef() *= rm(it.row());
    for (int col = 0; col < Mm.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mm, col); it; ++it) it.valueRef() *= rp(it.row());
    return SpMat((Mp * Mm).pruned());
}

/// D(alpha) + k on the truncated two-component space, ordered
/// [sector -K | sector +K].
inline SpMat build_D(const FourierPotential& pot, Complex alpha, Complex k,
                     const SectorPair& sp) {
    std::vector<Eigen::Triplet<Complex>> trip;
    const int dm = sp.minus.dim();
    for (int i = 0; i < dm; ++i) trip.emplace_back(i, i, sp.minus.mode(i).value() + k);
    for (int i = 0; i < sp.plus.dim(); ++i)
        trip.emplace_back(dm + i, dm + i, sp.plus.mode(i).value() + k);
    const SpMat Mp = potential_matrix(pot, sp, Which::U_plus);
    const SpMat Mm = potential_matrix(pot, sp, Which::U_minus);
    for (int col = 0; col < Mp.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mp, col); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), dm + col, alpha * it.value());
    for (int col = 0; col < Mm.outerSize(); ++col)
        for (SpMat::InnerIterator it(Mm, col); it; ++it)
            trip.emplace_back(dm + static_cast<int>(it.row()), col, alpha * it.value());
    SpMat D(sp.dim(), sp.dim());
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

namespace detail_phase {

inline Complex omega_pow(int e) {
    static const std::array<Complex, 3> w{Complex(1.0, 0.0), lat::omega,
                                          std::conj(lat::omega)};
    return w[static_cast<std::size_t>(((e % 3) + 3) % 3)];
}

} // namespace detail_phase

/// Compression of a rotation-commuting sector operator onto the symmetrized
/// basis of L^2_{0,j}. Label convention: j means u(omega z) = conj(omega)^j u(z),
/// i.e. e_[nu]^(j) = (e_nu + wbar^j e_{w nu} + w^j e_{wbar nu})/sqrt(3).
/// Entries come straight from the orbit layout [nu, w nu, wbar nu]:
///   B[r',r] = (1/3) sum_{h,k} w^{j(k-h)} A[3r'+k, 3r+h],
/// assembled in one pass over the nonzeros.
inline Mat restrict_subspace(const SpMat& A, int j, const SectorModes& modes,
                             double leak_tol = 1e-8) {
    const int R = modes.orbit_count();
    if (static_cast<int>(A.rows()) != modes.dim())
        throw error("restrict_subspace: operator and mode set disagree");
    Mat B = Mat::Zero(R, R);
    Mat X = Mat::Zero(R, R);  // leakage block: rows in subspace j+1
    double scale = 0.0;
    const int jo = (j + 1) % 3;
    for (int col = 0; col < A.outerSize(); ++col) {
        const int r = col / 3, h = col % 3;
        for (SpMat::InnerIterator it(A, col); it; ++it) {
            const int rp = static_cast<int>(it.row()) / 3, kk = static_cast<int>(it.row()) % 3;
            B(rp, r) += detail_phase::omega_pow(j * (kk - h)) * it.value() / 3.0;
            X(rp, r) += detail_phase::omega_pow(jo * kk - j * h) * it.value() / 3.0;
            scale += std::norm(it.value());
        }
    }
    if (X.norm() > leak_tol * (std::sqrt(scale) + 1e-300))
        throw non_invariant("operator leaks across rotational subspaces (built at k != 0?)");
    return B;
}

/// The three subspace blocks of A_0 at once (shared assembly).
inline std::array<Mat, 3> subspace_blocks(const FourierPotential& pot, const SectorPair& sp) {
    const SpMat A = build_Ak(pot, Complex(0.0), sp);
    return {restrict_subspace(A, 0, sp.minus), restrict_subspace(A, 1, sp.minus),
            restrict_subspace(A, 2, sp.minus)};
}

/// Sparse block of D(alpha) mapping the spinor subspace j into subspace j-1
/// (rows). Column space: {e_[nu]^(j)} over both sectors, [minus | plus].
inline SpMat spinor_subspace_block(const SpMat& D, int j, const SectorPair& sp) {
    const int jo = (j + 2) % 3;  // D: L_{0,j} -> L_{0,j-1}
    const int Rm = sp.minus.orbit_count(), Rp = sp.plus.orbit_count();
    const int dm = sp.minus.dim();
    auto block_index = [&](int flat) {
        return flat < dm ? std::pair<int, int>{flat / 3, flat % 3}
                         : std::pair<int, int>{Rm + (flat - dm) / 3, (flat - dm) % 3};
    };
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(D.nonZeros()));
    for (int col = 0; col < D.outerSize(); ++col) {
        const auto [cr, ch] = block_index(col);
        for (SpMat::InnerIterator it(D, col); it; ++it) {
            const auto [rr, rh] = block_index(static_cast<int>(it.row()));
            const Complex v =
                detail_phase::omega_pow(jo * rh - j * ch) * it.value() / 3.0;
            trip.emplace_back(rr, cr, v);
        }
    }
    SpMat B(Rm + Rp, Rm + Rp);
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

} // namespace chiralflat
