#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chiralflat/errors.hpp"
#include "chiralflat/fourier_ops.hpp"
#include "chiralflat/spectral.hpp"

namespace chiralflat {

// Bloch bands of H_k = [[0, (D(alpha)+k)^*], [D(alpha)+k, 0]]: the positive
// spectrum is the singular-value list of D(alpha)+k, which is what we
// compute (half the dimension, identical spectrum by the anti-diagonal block
// structure; the equivalence is itself a test). For complex alpha the same
// singular values serve as the band convention.

/// Ascending nonnegative bands E_1 <= E_2 <= ... at one k.
inline Eigen::VectorXd bands_at(const FourierPotential& pot, Complex alpha, Complex k,
                                TruncationParams t, int count = 8) {
    SectorPair sp(t);
    const SpMat D = build_D(pot, alpha, k, sp);
    auto ss = detail::smallest_singular(D, std::min(count, sp.dim()), 60);
    Eigen::VectorXd e(ss.values.size());
    for (std::size_t i = 0; i < ss.values.size(); ++i)
        e(static_cast<int>(i)) = ss.values[i];
    return e;
}

/// Full singular spectrum (dense); used by tests to check the doubled
/// Hermitian form against the singular values.
inline Eigen::VectorXd bands_at_dense(const FourierPotential& pot, Complex alpha, Complex k,
                                      TruncationParams t) {
    SectorPair sp(t);
    const Mat D = Mat(build_D(pot, alpha, k, sp));
    Eigen::BDCSVD<Mat> svd(D);
    Eigen::VectorXd s = svd.singularValues();
    std::sort(s.data(), s.data() + s.size());
    return s;
}

/// Uniform k-grid over the dual cell, half-offset to avoid high-symmetry
/// points.
inline std::vector<Complex> k_grid(int n) {
    std::vector<Complex> ks;
    ks.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            ks.push_back((i + 0.5) / double(n) * lat::q1 + (j + 0.5) / double(n) * lat::q2);
    return ks;
}

/// Named waypoints of the standard band path.
inline Complex waypoint(const std::string& name) {
    if (name == "Gamma" || name == "G") return Complex(0.0, 0.0);
    if (name == "K") return Complex(lat::K, 0.0);
    if (name == "Kp" || name == "K'") return Complex(-lat::K, 0.0);
    if (name == "M") return 0.5 * lat::q1;
    throw parse_error("unknown waypoint '" + name + "' (use Gamma, K, Kp, M)");
}

inline std::vector<Complex> k_path(const std::vector<std::string>& names, int per_segment) {
    if (names.size() < 2) throw error("k_path needs at least two waypoints");
    std::vector<Complex> ks;
    for (std::size_t s = 0; s + 1 < names.size(); ++s) {
        const Complex a = waypoint(names[s]);
        const Complex b = waypoint(names[s + 1]);
        for (int i = 0; i < per_segment; ++i)
            ks.push_back(a + (b - a) * (double(i) / per_segment));
    }
    ks.push_back(waypoint(names.back()));
    return ks;
}

struct MultiplicityReport {
    int m{0};
    double flat_max{0.0};   // max over the grid of E_m
    double next_min{0.0};   // min over the grid of E_{m+1}
};

/// m(alpha) = min{ j > 0 : max_k E_{j+1}(alpha,k) > gap_floor }.
inline MultiplicityReport multiplicity(const FourierPotential& pot, Complex alpha,
                                       const std::vector<Complex>& grid, TruncationParams t,
                                       double gap_floor = 1e-6, double flat_threshold = 1e-4) {
    const int probe = 6;
    std::vector<Eigen::VectorXd> all;
    all.reserve(grid.size());
    for (const Complex& k : grid) all.push_back(bands_at(pot, alpha, k, t, probe));
    MultiplicityReport rep;
    for (int j = 0; j + 1 < probe; ++j) {
        double mx = 0.0;
        for (const auto& e : all) mx = std::max(mx, e(j + 1));
        if (mx > gap_floor) {
            rep.m = j + 1;
            double flat = 0.0, nxt = 1e300;
            for (const auto& e : all) {
                flat = std::max(flat, e(j));
                nxt = std::min(nxt, e(j + 1));
            }
            rep.flat_max = flat;
            rep.next_min = nxt;
            if (mx < 10.0 * flat_threshold)
                throw inconclusive_gap("max_k E_{m+1} within a factor 10 of the flatness threshold");
            return rep;
        }
    }
    throw inconclusive_gap("no band above the gap floor among the probed bands");
}

struct GapReport {
    double flat_max{0.0};
    double gap_min{0.0};
    int m{0};
};

inline GapReport gap_report(const FourierPotential& pot, Complex alpha,
                            const std::vector<Complex>& grid, TruncationParams t) {
    MultiplicityReport mr = multiplicity(pot, alpha, grid, t);
    return {mr.flat_max, mr.next_min, mr.m};
}

/// Full (non-chiral) Bistritzer-MacDonald bands. Components are ordered
/// (A1, A2 | B1, B2); the chiral block is D(alpha)+k from A to B and the
/// anti-chiral tunnelling sits at A1<-A2 as beta*V(z) and B2<-B1 as
/// beta*V(-z), completed Hermitian by the conjugate entries (this is the
/// unique sector-consistent placement of the caption's potentials).
inline Eigen::VectorXd full_bm_bands(const FourierPotential& pot,
                                     const FourierPotential& antichiral, Complex alpha,
                                     double beta, Complex k, TruncationParams t) {
    SectorPair sp(t);
    const int dm = sp.minus.dim(), dp = sp.plus.dim();
    const int half = dm + dp;
    const SpMat Dk = build_D(pot, alpha, k, sp);
    FourierPotential ac = antichiral;
    ac.derive_minus_from_plus();  // the B-block carries V(-z)
    const SpMat Vp = potential_matrix(ac, sp, Which::U_plus);    // V(z): +K -> -K
    const SpMat Vm = potential_matrix(ac, sp, Which::U_minus);   // V(-z): -K -> +K
    Mat H = Mat::Zero(2 * half, 2 * half);
    H.block(half, 0, half, half) = Mat(Dk);
    H.block(0, half, half, half) = Mat(Dk).adjoint();
    // A-block: A1 <- A2 entry beta V(z)
    H.block(0, dm, dm, dp) = beta * Mat(Vp);
    H.block(dm, 0, dp, dm) = beta * Mat(Vp).adjoint();
    // B-block: B2 <- B1 entry beta V(-z)
    H.block(half + dm, half, dp, dm) = beta * Mat(Vm);
    H.block(half, half + dm, dm, dp) = beta * Mat(Vm).adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw error("full BM eigensolve failed");
    return es.eigenvalues();
}

} // namespace chiralflat
