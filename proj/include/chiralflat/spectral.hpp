#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#ifdef CHIRALFLAT_USE_LAPACKE
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "chiralflat/fourier_ops.hpp"

namespace chiralflat {

enum class AngleClass { simple, twofold, jordan_degenerate };

inline const char* to_string(AngleClass c) {
    switch (c) {
        case AngleClass::simple: return "simple";
        case AngleClass::twofold: return "double";
        default: return "jordan_degenerate";
    }
}

struct MagicAngle {
    Complex alpha{0.0, 0.0};
    int subspace{2};                    // which L^2_{0,j} carries the T_0 eigenvector
    int algebraic_mult{1};
    int geometric_mult{1};
    AngleClass classification{AngleClass::simple};
    std::array<int, 3> kernel_dims{0, 0, 0};
    double residual{0.0};               // smallest singular value of truncated D(alpha)
    TruncationParams truncation{};
};

struct SpectralOptions {
    double eig_floor{0.02};             // keep A_0 eigenvalues with |mu| > floor
    double real_window_imag_tol{1e-6};
    double dedup_tol{1e-7};
    double residual_threshold{1e-6};    // confirm alpha by sigma_min(D) below this (relative)
    double kernel_rel_threshold{1e-8};  // sigma < thr * sigma_max counts as kernel
    double kernel_gap_factor{1e3};
    double cluster_scale{1e-3};         // times local spacing
    bool stability_check{true};
    double stability_delta{1e-4};
};

namespace detail {

/// Eigenvalues of a dense complex non-Hermitian matrix.
inline Vec eigenvalues(Mat M) {
#ifdef CHIRALFLAT_USE_LAPACKE
    const lapack_int n = static_cast<lapack_int>(M.rows());
    Vec w(n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, M.data(), n, w.data(), nullptr, 1,
                      nullptr, 1);
    if (info != 0) throw error("zgeev failed with info " + std::to_string(info));
    return w;
#else
    Eigen::ComplexEigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw error("eigensolver failed to converge");
    return es.eigenvalues();
#endif
}

/// Smallest singular pairs of a sparse matrix by block inverse iteration on
/// D^H D (+ tiny shift). Returns ascending singular values with right
/// singular vectors as columns.
struct SmallSingular {
    std::vector<double> values;
    Mat vectors;
};

inline SmallSingular smallest_singular(const SpMat& D, int count, int iters = 40) {
    const int n = static_cast<int>(D.cols());
    count = std::min(count, n);
    SpMat M = (SpMat(D.adjoint()) * D).pruned();
    double scale2 = 0.0;
    for (int c = 0; c < M.outerSize(); ++c)
        for (SpMat::InnerIterator it(M, c); it; ++it)
            if (it.row() == c) scale2 = std::max(scale2, std::abs(it.value().real()));
    const double shift = scale2 * 1e-28 + 1e-300;
    for (int i = 0; i < n; ++i) M.coeffRef(i, i) += shift;
    Eigen::SparseLU<SpMat> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw error("sparse factorization failed");

    Mat V = Mat::Zero(n, count);
    for (int c = 0; c < count; ++c)
        for (int i = 0; i < n; ++i)
            V(i, c) = Complex(std::cos(0.37 * (i + 1) * (c + 1)),
                              std::sin(0.11 * (i + 2) * (c + 1)));
    Eigen::HouseholderQR<Mat> qr0(V);
    V = qr0.householderQ() * Mat::Identity(n, count);
    Eigen::VectorXd estimates = Eigen::VectorXd::Zero(count);
    for (int it = 0; it < iters; ++it) {
        Mat W = lu.solve(V);
        Eigen::HouseholderQR<Mat> qr(W);
        V = qr.householderQ() * Mat::Identity(n, count);
        Mat MV = Mat(D * V);
        Mat H = MV.adjoint() * MV;
        Eigen::SelfAdjointEigenSolver<Mat> sa(H);
        Eigen::VectorXd cur = sa.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const bool done = it > 4 && (cur - estimates).norm() <= 1e-12 * (1.0 + cur.norm());
        estimates = cur;
        if (done || it == iters - 1) {
            V = V * sa.eigenvectors();
            break;
        }
    }
    SmallSingular out;
    out.vectors = V;
    out.values.assign(estimates.data(), estimates.data() + count);
    return out;
}

/// Cheap upper bound on sigma_max for relative thresholds.
inline double sigma_max_bound(const SpMat& D) {
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(D.cols());
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(D.rows());
    for (int c = 0; c < D.outerSize(); ++c)
        for (SpMat::InnerIterator it(D, c); it; ++it) {
            colsum(c) += std::abs(it.value());
            rowsum(it.row()) += std::abs(it.value());
        }
    return std::sqrt(colsum.maxCoeff() * rowsum.maxCoeff());
}

inline Complex canonical_alpha(Complex a) {
    if (a.real() < 0 || (a.real() == 0 && a.imag() < 0)) return -a;
    return a;
}

/// Weight of a coefficient vector in the spinor subspace j (squared norm of
/// the projection), computed from the orbit layout.
inline double subspace_weight(const Vec& v, const SectorPair& sp, int j) {
    double acc = 0.0;
    const int dm = sp.minus.dim();
    auto add = [&](int base, int orbits) {
        for (int r = 0; r < orbits; ++r) {
            Complex c{0.0};
            // <e_[nu]^(j), v> with basis coefficients wbar^{jh}/sqrt(3)
            for (int h = 0; h < 3; ++h)
                c += detail_phase::omega_pow(j * h) * v(base + 3 * r + h);
            acc += std::norm(c) / 3.0;
        }
    };
    add(0, sp.minus.orbit_count());
    add(dm, sp.plus.orbit_count());
    return acc;
}

} // namespace detail

/// Shared per-truncation spectral data: the three A_0 subspace blocks and
/// their eigenvalues.
struct BlockSpectrum {
    TruncationParams trunc;
    std::array<Vec, 3> eigenvalues;

    static BlockSpectrum compute(const FourierPotential& pot, TruncationParams t) {
        SectorPair sp(t);
        const auto blocks = subspace_blocks(pot, sp);
        BlockSpectrum bs;
        bs.trunc = t;
        for (int j = 0; j < 3; ++j)
            bs.eigenvalues[static_cast<std::size_t>(j)] =
                detail::eigenvalues(blocks[static_cast<std::size_t>(j)]);
        return bs;
    }
};

/// Kernel dimensions of D(alpha) per rotational subspace with the two
/// smallest singular values of each restricted block (D maps L^2_{0,j} into
/// L^2_{0,j-1}).
struct SubspaceKernelReport {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> sigma_min{};
    std::array<double, 3> sigma_next{};
};

inline SubspaceKernelReport subspace_kernels(const FourierPotential& pot, Complex alpha,
                                             const SectorPair& sp,
                                             const SpectralOptions& opt = {}) {
    const SpMat D = build_D(pot, alpha, Complex(0.0), sp);
    const double smax = detail::sigma_max_bound(D);
    SubspaceKernelReport rep;
    for (int j = 0; j < 3; ++j) {
        const SpMat B = spinor_subspace_block(D, j, sp);
        auto ss = detail::smallest_singular(B, 3);
        int dim = 0;
        for (std::size_t i = 0; i < ss.values.size(); ++i)
            if (ss.values[i] < opt.kernel_rel_threshold * smax) ++dim;
        rep.dims[static_cast<std::size_t>(j)] = dim;
        rep.sigma_min[static_cast<std::size_t>(j)] = ss.values[0];
        rep.sigma_next[static_cast<std::size_t>(j)] = ss.values.size() > 1 ? ss.values[1] : 0.0;
    }
    return rep;
}

enum class Window { real_axis, complex_plane };

/// Magic angles from the per-subspace Birman-Schwinger blocks: every
/// eigenvalue mu of A_0|_j above the modulus floor yields candidates
/// alpha = +-1/sqrt(mu); candidates are confirmed by the residual of D(alpha)
/// and deduplicated across signs and subspaces. The optional stability check
/// estimates the first-order movement of each angle at truncation N+4 and
/// rejects the scan when any retained angle drifts beyond delta.
inline std::vector<MagicAngle> magic_angles(const FourierPotential& pot, TruncationParams t,
                                            Window window, SpectralOptions opt = {},
                                            const BlockSpectrum* precomputed = nullptr) {
    SectorPair sp(t);
    BlockSpectrum local;
    if (!precomputed) {
        local = BlockSpectrum::compute(pot, t);
        precomputed = &local;
    }
    struct Cand {
        Complex alpha;
        int subspace;
    };
    std::vector<Cand> cands;
    for (int j = 0; j < 3; ++j) {
        const Vec& mu = precomputed->eigenvalues[static_cast<std::size_t>(j)];
        for (int i = 0; i < mu.size(); ++i) {
            if (std::abs(mu(i)) <= opt.eig_floor) continue;
            const Complex a = detail::canonical_alpha(1.0 / std::sqrt(mu(i)));
            if (window == Window::real_axis && std::abs(a.imag()) > opt.real_window_imag_tol)
                continue;
            cands.push_back({a, j});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (std::abs(x.alpha) != std::abs(y.alpha)) return std::abs(x.alpha) < std::abs(y.alpha);
        if (x.alpha.real() != y.alpha.real()) return x.alpha.real() < y.alpha.real();
        if (x.alpha.imag() != y.alpha.imag()) return x.alpha.imag() < y.alpha.imag();
        return x.subspace < y.subspace;
    });
    std::vector<MagicAngle> out;
    for (const auto& c : cands) {
        if (!out.empty() && std::abs(out.back().alpha - c.alpha) <
                                opt.dedup_tol * (1.0 + std::abs(c.alpha)))
            continue;
        const SpMat D = build_D(pot, c.alpha, Complex(0.0), sp);
        const auto ss = detail::smallest_singular(D, 1);
        if (ss.values[0] > opt.residual_threshold * detail::sigma_max_bound(D)) continue;
        MagicAngle ma;
        ma.alpha = c.alpha;
        ma.subspace = c.subspace;
        ma.residual = ss.values[0];
        ma.truncation = t;
        out.push_back(ma);
    }
    if (opt.stability_check) {
        SectorPair sp2(TruncationParams{t.N + 4});
        const SpMat dD = build_D(pot, Complex(1.0), Complex(0.0), sp2) -
                         build_D(pot, Complex(0.0), Complex(0.0), sp2);
        for (const auto& ma : out) {
            const SpMat D2 = build_D(pot, ma.alpha, Complex(0.0), sp2);
            auto ss = detail::smallest_singular(D2, 1);
            const Vec v = ss.vectors.col(0);
            Vec u = D2 * v;
            const double un = u.norm();
            const Vec dDv = dD * v;
            double denom = un > 1e-300 ? std::abs(Complex((u / un).adjoint() * dDv))
                                       : dDv.norm();
            denom = std::max(denom, 1e-12);
            const double movement = ss.values[0] / denom;
            if (movement > opt.stability_delta * (1.0 + std::abs(ma.alpha)))
                throw truncation_unstable(
                    "angle moved by ~" + std::to_string(movement) +
                    " between N and N+4; increase the truncation");
        }
    }
    return out;
}

/// Multiplicity data at a confirmed magic alpha: geometric count from the
/// singular values of D(alpha), algebraic count from the eigenvalue cluster
/// of the A_0 blocks at 1/alpha^2.
inline MagicAngle classify(const FourierPotential& pot, Complex alpha, TruncationParams t,
                           SpectralOptions opt = {}, const BlockSpectrum* precomputed = nullptr) {
    SectorPair sp(t);
    MagicAngle ma;
    ma.alpha = alpha;
    ma.truncation = t;

    const auto rep = subspace_kernels(pot, alpha, sp, opt);
    ma.kernel_dims = rep.dims;
    ma.geometric_mult = rep.dims[0] + rep.dims[1] + rep.dims[2];
    ma.subspace = 2;
    for (int j = 0; j < 3; ++j)
        if (rep.dims[static_cast<std::size_t>(j)] > 0) {
            ma.subspace = j;
            break;
        }
    ma.residual = *std::min_element(rep.sigma_min.begin(), rep.sigma_min.end());

    BlockSpectrum local;
    if (!precomputed) {
        local = BlockSpectrum::compute(pot, t);
        precomputed = &local;
    }
    const Complex mu_star = 1.0 / (alpha * alpha);
    std::vector<double> dist;
    for (const auto& mu : precomputed->eigenvalues)
        for (int i = 0; i < mu.size(); ++i) dist.push_back(std::abs(mu(i) - mu_star));
    std::sort(dist.begin(), dist.end());
    const double local_spacing = [&] {
        for (double d : dist)
            if (d > 1e-2 * std::max(std::abs(mu_star), 0.05)) return d;
        return dist.back();
    }();
    const double r_cl = opt.cluster_scale * local_spacing;
    int alg = 0;
    for (double d : dist)
        if (d < r_cl) ++alg;
    for (double d : dist)
        if (d >= r_cl && d < 10.0 * r_cl)
            throw ambiguous_cluster("eigenvalue at distance " + std::to_string(d) +
                                    " straddles the cluster radius " + std::to_string(r_cl));
    ma.algebraic_mult = std::max(alg, ma.geometric_mult);

    if (ma.algebraic_mult > ma.geometric_mult)
        ma.classification = AngleClass::jordan_degenerate;
    else
        ma.classification = (ma.geometric_mult >= 2) ? AngleClass::twofold : AngleClass::simple;
    return ma;
}

/// Flat-band kernel vectors of D(alpha) + k.
struct KernelVector {
    Vec coeffs;          // over [sector -K | sector +K]
    Complex k;
    Complex alpha;
    int subspace{-1};    // tag when k = 0, else -1
    double residual{0.0};
};

inline std::vector<KernelVector> kernel_basis(const FourierPotential& pot, Complex alpha,
                                              Complex k, TruncationParams t,
                                              SpectralOptions opt = {}) {
    SectorPair sp(t);
    const SpMat D = build_D(pot, alpha, k, sp);
    const int probe = 4;
    auto ss = detail::smallest_singular(D, probe);
    const double smax = detail::sigma_max_bound(D);
    std::vector<KernelVector> out;
    for (int i = 0; i < probe; ++i) {
        if (ss.values[static_cast<std::size_t>(i)] >= opt.kernel_rel_threshold * smax) break;
        KernelVector kv;
        kv.coeffs = ss.vectors.col(i);
        kv.coeffs /= kv.coeffs.norm();
        kv.k = k;
        kv.alpha = alpha;
        kv.residual = ss.values[static_cast<std::size_t>(i)];
        if (std::abs(k) == 0.0) {
            double best = -1.0;
            for (int j = 0; j < 3; ++j) {
                const double w = detail::subspace_weight(kv.coeffs, sp, j);
                if (w > best) {
                    best = w;
                    kv.subspace = j;
                }
            }
        }
        out.push_back(std::move(kv));
    }
    if (out.empty())
        throw empty_kernel("no singular value of D(alpha)+k below the kernel threshold");
    return out;
}

/// Matched-spectrum comparison of T_{k1} and T_{k2} via the A_k spectra
/// (the nonzero spectrum of T_k is the +-sqrt of Spec A_k).
struct KIndependenceReport {
    double max_distance{0.0};
    int matched{0};
};

inline KIndependenceReport verify_k_independence(const FourierPotential& pot, TruncationParams t,
                                                 Complex k1, Complex k2, double floor = 0.1) {
    SectorPair sp(t);
    const Vec e1 = detail::eigenvalues(Mat(build_Ak(pot, k1, sp)));
    const Vec e2 = detail::eigenvalues(Mat(build_Ak(pot, k2, sp)));
    const double f2 = floor * floor;  // floor applies to |mu_T| = sqrt|mu_A|
    std::vector<Complex> a, b;
    for (int i = 0; i < e1.size(); ++i)
        if (std::abs(e1(i)) > f2) a.push_back(e1(i));
    for (int i = 0; i < e2.size(); ++i)
        if (std::abs(e2(i)) > f2) b.push_back(e2(i));
    KIndependenceReport rep;
    rep.matched = static_cast<int>(std::min(a.size(), b.size()));
    std::vector<bool> used(b.size(), false);
    for (const Complex& x : a) {
        double bestd = 1e300;
        std::size_t besti = 0;
        bool found = false;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(x - b[i]);
            if (d < bestd) {
                bestd = d;
                besti = i;
                found = true;
            }
        }
        if (found) {
            used[besti] = true;
            rep.max_distance = std::max(rep.max_distance, bestd);
        }
    }
    if (a.size() != b.size()) rep.max_distance = 1e300;
    return rep;
}

} // namespace chiralflat
