#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "chiralflat/theta.hpp"

namespace chiralflat {

constexpr double kLatticeMaskRadius = 0.05;  // times |q1|, around Lambda* points

/// Distance of k from the dual lattice Lambda*.
inline double dual_lattice_distance(Complex k) {
    const double a = k.real() / lat::q1.real();
    const double b = (k.imag() - a * lat::q1.imag()) / lat::q2.imag();
    double best = 1e300;
    for (int da = -1; da <= 1; ++da)
        for (int db = -1; db <= 1; ++db)
            best = std::min(best, std::abs(k - lat::dual_point(std::llround(a) + da,
                                                               std::llround(b) + db)));
    return best;
}

namespace chern_detail {

/// theta1 evaluated on the whole offset cell grid shifted by c:
/// z_{ij} = (i+1/2)/M + (j+1/2)/M omega + c. Term-wise axis factorization.
inline std::vector<Complex> theta1_grid(Complex c, int M) {
    std::vector<Complex> out(static_cast<std::size_t>(M) * M, Complex(0.0));
    const double immax = std::abs(c.imag()) + lat::omega.imag() + 1.0;
    const int N = theta_detail::cutoff(immax);
    std::vector<Complex> fi(static_cast<std::size_t>(M)), fj(static_cast<std::size_t>(M));
    for (int n = -N; n <= N; ++n) {
        const double h = n + 0.5;
        const Complex base =
            std::exp(Complex(0.0, M_PI) * (h * h * lat::omega) +
                     Complex(0.0, 2.0 * M_PI * h) * (c + 0.5));
        const Complex si = std::exp(Complex(0.0, 2.0 * M_PI * h) / double(M));
        const Complex sj = std::exp(Complex(0.0, 2.0 * M_PI * h) * lat::omega / double(M));
        Complex pi_ = std::exp(Complex(0.0, M_PI * h) / double(M));          // half-offset
        Complex pj = std::exp(Complex(0.0, M_PI * h) * lat::omega / double(M));
        for (int i = 0; i < M; ++i) {
            fi[static_cast<std::size_t>(i)] = pi_;
            pi_ *= si;
        }
        for (int j = 0; j < M; ++j) {
            fj[static_cast<std::size_t>(j)] = pj;
            pj *= sj;
        }
        for (int i = 0; i < M; ++i) {
            const Complex bi = base * fi[static_cast<std::size_t>(i)];
            for (int j = 0; j < M; ++j)
                out[static_cast<std::size_t>(i) * M + j] += bi * fj[static_cast<std::size_t>(j)];
        }
    }
    for (auto& v : out) v = -v;
    return out;
}

} // namespace chern_detail

enum class FrameKind { theta_frame, numeric_frame };

/// Holomorphic flat-band frame over the Brillouin torus. For a two-fold
/// degenerate angle the frame is u_j(k) = F_k(z -+ z_S) u0 with u0 the
/// L^2_{0,0} kernel vector (simple zeros at +-z_S); for a simple angle it is
/// F_k(z) u0 with u0 the L^2_{0,2} vector (zero at 0).
class ThetaFrame {
public:
    ThetaFrame(const FourierPotential& pot, Complex alpha, TruncationParams t, int M = 64)
        : M_(M), sp_(t) {
        const auto kers = kernel_basis(pot, alpha, Complex(0.0), t);
        rank_ = static_cast<int>(kers.size());
        if (rank_ > 2) throw error("ThetaFrame supports rank 1 and 2 only");
        const KernelVector* u0 = nullptr;
        if (rank_ == 2) {
            for (const auto& kv : kers)
                if (kv.subspace == 0) u0 = &kv;
            if (!u0) throw error("double angle without an L^2_{0,0} kernel vector");
            shifts_ = {Complex(0.0, 1.0 / std::sqrt(3.0)), Complex(0.0, -1.0 / std::sqrt(3.0))};
        } else {
            u0 = &kers.front();
            shifts_ = {Complex(0.0, 0.0)};
        }
        u0_ = sample_spinor(u0->coeffs, sp_, M_);
        const double nrm = std::sqrt(u0_.norm2_mean());
        for (auto& v : u0_.comp1) v /= nrm;
        for (auto& v : u0_.comp2) v /= nrm;
        // precompute denominators theta(z + shift) over the grid
        for (const Complex s : shifts_)
            denom_.push_back(chern_detail::theta1_grid(s, M_));
    }

    int rank() const { return rank_; }
    int grid() const { return M_; }
    const SectorPair& sectors() const { return sp_; }
    const SpinorField& base_vector() const { return u0_; }

    /// Frame vectors at momentum k, sampled on the cell grid.
    std::vector<SpinorField> at(Complex k) const {
        std::vector<SpinorField> out;
        const Complex zk = lat::z_map(k);
        for (std::size_t r = 0; r < shifts_.size(); ++r) {
            const auto num = chern_detail::theta1_grid(shifts_[r] - zk, M_);
            SpinorField f;
            f.M = M_;
            f.comp1.resize(num.size());
            f.comp2.resize(num.size());
            for (int i = 0; i < M_; ++i)
                for (int j = 0; j < M_; ++j) {
                    const std::size_t idx = static_cast<std::size_t>(i) * M_ + j;
                    const Complex z = u0_.z_at(i, j);
                    const Complex bloch = std::exp(Complex(0.0, 1.0) * (z - std::conj(z)) * k * 0.5);
                    const Complex fac = bloch * num[idx] / denom_[r][idx];
                    f.comp1[idx] = fac * u0_.comp1[idx];
                    f.comp2[idx] = fac * u0_.comp2[idx];
                }
            out.push_back(std::move(f));
        }
        return out;
    }

private:
    int M_;
    int rank_{2};
    SectorPair sp_;
    SpinorField u0_;
    std::vector<Complex> shifts_;
    std::vector<std::vector<Complex>> denom_;
};

/// Gramian of a sampled frame: G_ij = <u_i, u_j> by the (spectrally accurate)
/// grid mean over one fundamental cell.
inline Mat gramian(const std::vector<SpinorField>& frame) {
    const int r = static_cast<int>(frame.size());
    Mat G(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            Complex acc{0.0};
            for (std::size_t t = 0; t < frame[static_cast<std::size_t>(a)].comp1.size(); ++t)
                acc += frame[static_cast<std::size_t>(a)].comp1[t] *
                           std::conj(frame[static_cast<std::size_t>(b)].comp1[t]) +
                       frame[static_cast<std::size_t>(a)].comp2[t] *
                           std::conj(frame[static_cast<std::size_t>(b)].comp2[t]);
            G(a, b) = acc / double(frame[static_cast<std::size_t>(a)].comp1.size());
        }
    return G;
}

inline double gram_det(const ThetaFrame& fr, Complex k) {
    const Mat G = gramian(fr.at(k));
    return std::max(G.determinant().real(), 0.0);
}

struct CurvatureField {
    int n{0};
    std::vector<Complex> k;     // unmasked sample points
    std::vector<double> H;
    std::vector<bool> mask;     // full n*n grid mask (true = excluded)
    double g_floor{1e-14};
};

/// Berry curvature H = (1/4) * Laplacian_k log g on the half-offset grid over
/// the dual cell; cells within the mask radius of Lambda* are excluded.
inline CurvatureField curvature_field(const ThetaFrame& fr, int n, double h = 3e-3) {
    CurvatureField out;
    out.n = n;
    const double maskr = kLatticeMaskRadius * std::abs(lat::q1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex k = (i + 0.5) / double(n) * lat::q1 + (j + 0.5) / double(n) * lat::q2;
            const bool masked = dual_lattice_distance(k) < maskr;
            out.mask.push_back(masked);
            if (masked) continue;
            const double g0 = gram_det(fr, k);
            if (g0 < out.g_floor)
                throw singular_sample("Gramian determinant below floor at an unmasked point");
            const double lx1 = std::log(gram_det(fr, k + h));
            const double lx0 = std::log(gram_det(fr, k - h));
            const double ly1 = std::log(gram_det(fr, k + Complex(0.0, h)));
            const double ly0 = std::log(gram_det(fr, k - Complex(0.0, h)));
            const double H = 0.25 * (lx1 + lx0 + ly1 + ly0 - 4.0 * std::log(g0)) / (h * h);
            out.k.push_back(k);
            out.H.push_back(H);
        }
    return out;
}

/// Pointwise curvature away from the mask.
inline double curvature_at(const ThetaFrame& fr, Complex k, double h = 3e-3) {
    const double g0 = gram_det(fr, k);
    if (g0 < 1e-14) throw singular_sample("Gramian determinant vanishes at sample point");
    const double lx1 = std::log(gram_det(fr, k + h));
    const double lx0 = std::log(gram_det(fr, k - h));
    const double ly1 = std::log(gram_det(fr, k + Complex(0.0, h)));
    const double ly0 = std::log(gram_det(fr, k - Complex(0.0, h)));
    return 0.25 * (lx1 + lx0 + ly1 + ly0 - 4.0 * std::log(g0)) / (h * h);
}

namespace chern_detail {

inline Complex overlap_det(const std::vector<SpinorField>& A, const std::vector<SpinorField>& B) {
    const int r = static_cast<int>(A.size());
    Mat M(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            Complex acc{0.0};
            for (std::size_t t = 0; t < A[static_cast<std::size_t>(a)].comp1.size(); ++t)
                acc += std::conj(A[static_cast<std::size_t>(a)].comp1[t]) *
                           B[static_cast<std::size_t>(b)].comp1[t] +
                       std::conj(A[static_cast<std::size_t>(a)].comp2[t]) *
                           B[static_cast<std::size_t>(b)].comp2[t];
            M(a, b) = acc / double(A[static_cast<std::size_t>(a)].comp1.size());
        }
    return M.determinant();
}

/// tau(p)^{-1}: pointwise multiplication by e^{-i<z,p>} on samples.
inline std::vector<SpinorField> transport(const std::vector<SpinorField>& F, Complex p) {
    std::vector<SpinorField> out = F;
    const int M = F.front().M;
    for (auto& f : out)
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * M + j;
                const Complex ph = std::exp(Complex(0.0, -lat::pairing(f.z_at(i, j), p)));
                f.comp1[idx] *= ph;
                f.comp2[idx] *= ph;
            }
    return out;
}

} // namespace chern_detail

/// Gauge-invariant plaquette (link-variable) Chern number on an n x n grid
/// over the dual cell. Boundary links are closed with the tau(p)-transport of
/// the bundle identification; the result must sit within 0.05 of an integer.
inline int chern_plaquette(const ThetaFrame& fr, int n) {
    std::vector<std::vector<SpinorField>> frames;
    frames.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            frames.push_back(
                fr.at((i + 0.5) / double(n) * lat::q1 + (j + 0.5) / double(n) * lat::q2));
    auto get = [&](int i, int j) {
        const int wi = (i == n) ? 1 : 0, wj = (j == n) ? 1 : 0;
        const auto& base = frames[static_cast<std::size_t>((i % n)) * n + (j % n)];
        if (!wi && !wj) return base;
        return chern_detail::transport(base, double(wi) * lat::q1 + double(wj) * lat::q2);
    };
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto f00 = get(i, j), f10 = get(i + 1, j), f11 = get(i + 1, j + 1),
                       f01 = get(i, j + 1);
            const Complex prod = chern_detail::overlap_det(f00, f10) *
                                 chern_detail::overlap_det(f10, f11) *
                                 chern_detail::overlap_det(f11, f01) *
                                 chern_detail::overlap_det(f01, f00);
            total += std::arg(prod);
        }
    const double c1 = -total / (2.0 * M_PI);
    const double rounded = std::round(c1);
    if (std::abs(c1 - rounded) > 0.05)
        throw non_quantized("plaquette sum " + std::to_string(c1) +
                            " too far from an integer; refine the grid");
    return static_cast<int>(rounded);
}

/// Same method with per-point numeric kernel frames (SVD of D(alpha)+k);
/// boundary transport shifts Fourier indices by -p. Gauge invariance of the
/// link determinants makes the two frame choices agree.
inline int chern_plaquette_numeric(const FourierPotential& pot, Complex alpha,
                                   TruncationParams t, int n, int rank) {
    SectorPair sp(t);
    std::vector<Mat> frames;
    frames.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex k = (i + 0.5) / double(n) * lat::q1 + (j + 0.5) / double(n) * lat::q2;
            const SpMat D = build_D(pot, alpha, k, sp);
            auto ss = detail::smallest_singular(D, rank + 1);
            if (rank < static_cast<int>(ss.values.size()) &&
                ss.values[static_cast<std::size_t>(rank)] <
                    1e3 * ss.values[static_cast<std::size_t>(rank - 1)])
                throw error("kernel rank not constant across the grid");
            frames.push_back(ss.vectors.leftCols(rank));
        }
    auto shift_coeffs = [&](const Mat& F, int wi, int wj) {
        Mat out = Mat::Zero(F.rows(), F.cols());
        const int dm = sp.minus.dim();
        for (int c = 0; c < F.cols(); ++c) {
            for (int i = 0; i < dm; ++i) {
                const auto& mi = sp.minus.mode(i);
                const int tgt = sp.minus.find(mi.m - wi, mi.n - wj);
                if (tgt >= 0) out(tgt, c) = F(i, c);
            }
            for (int i = 0; i < sp.plus.dim(); ++i) {
                const auto& mi = sp.plus.mode(i);
                const int tgt = sp.plus.find(mi.m - wi, mi.n - wj);
                if (tgt >= 0) out(dm + tgt, c) = F(dm + i, c);
            }
        }
        return out;
    };
    auto get = [&](int i, int j) {
        const int wi = (i == n) ? 1 : 0, wj = (j == n) ? 1 : 0;
        const Mat& base = frames[static_cast<std::size_t>((i % n)) * n + (j % n)];
        if (!wi && !wj) return base;
        return shift_coeffs(base, wi, wj);
    };
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Mat f00 = get(i, j), f10 = get(i + 1, j), f11 = get(i + 1, j + 1),
                      f01 = get(i, j + 1);
            const Complex prod = Complex((f00.adjoint() * f10).determinant()) *
                                 Complex((f10.adjoint() * f11).determinant()) *
                                 Complex((f11.adjoint() * f01).determinant()) *
                                 Complex((f01.adjoint() * f00).determinant());
            total += std::arg(prod);
        }
    const double c1 = -total / (2.0 * M_PI);
    const double rounded = std::round(c1);
    if (std::abs(c1 - rounded) > 0.05)
        throw non_quantized("plaquette sum " + std::to_string(c1) + " too far from an integer");
    return static_cast<int>(rounded);
}

struct BoundaryIntegralResult {
    double boundary_term{0.0};
    double puncture_term{0.0};
    double total{0.0};
};

/// The paper's contour decomposition of c_1: (i/2pi) times the integral of
/// d_k log g over the cell boundary minus the shrinking-circle contribution
/// at the Gramian zero. For a rank-2 frame the two terms are -2 and +1.
inline BoundaryIntegralResult boundary_integral_c1(const ThetaFrame& fr, int per_edge = 32,
                                                   double h = 1e-4) {
    const double maskr = kLatticeMaskRadius * std::abs(lat::q1);
    auto dk_log_g = [&](Complex k) {
        const double gx1 = std::log(gram_det(fr, k + h));
        const double gx0 = std::log(gram_det(fr, k - h));
        const double gy1 = std::log(gram_det(fr, k + Complex(0.0, h)));
        const double gy0 = std::log(gram_det(fr, k - Complex(0.0, h)));
        return 0.5 * Complex((gx1 - gx0) / (2.0 * h), -(gy1 - gy0) / (2.0 * h));
    };
    auto contour = [&](const std::vector<Complex>& pts, bool check_mask) {
        Complex acc{0.0};
        const int nseg = static_cast<int>(pts.size());
        for (int s = 0; s < nseg; ++s) {
            const Complex a = pts[static_cast<std::size_t>(s)];
            const Complex b = pts[static_cast<std::size_t>((s + 1) % nseg)];
            for (int t = 0; t < per_edge; ++t) {
                const Complex km = a + (b - a) * ((t + 0.5) / per_edge);
                if (check_mask && dual_lattice_distance(km) < maskr)
                    throw contour_too_close("contour point inside the lattice mask");
                acc += dk_log_g(km) * (b - a) / double(per_edge);
            }
        }
        return acc;
    };
    const std::vector<Complex> cell{(lat::q1 + lat::q2) * 0.5, (-lat::q1 + lat::q2) * 0.5,
                                    (-lat::q1 - lat::q2) * 0.5, (lat::q1 - lat::q2) * 0.5};
    BoundaryIntegralResult res;
    res.boundary_term = (Complex(0.0, 1.0) / (2.0 * M_PI) * contour(cell, true)).real();
    if (fr.rank() == 2) {
        // g ~ g0 |k|^2 at 0: the epsilon-circle term; one Richardson step in
        // epsilon removes the O(eps) error.
        auto circle = [&](double eps) {
            std::vector<Complex> pts;
            const int npts = 48;
            for (int t = 0; t < npts; ++t)
                pts.push_back(eps * std::exp(Complex(0.0, 2.0 * M_PI * t / npts)));
            return (-Complex(0.0, 1.0) / (2.0 * M_PI) * contour(pts, false)).real();
        };
        const double e1 = 0.04 * std::abs(lat::q1), e2 = 0.02 * std::abs(lat::q1);
        const double I1 = circle(e1), I2 = circle(e2);
        res.puncture_term = 2.0 * I2 - I1;
    } else {
        res.puncture_term = 0.0;  // rank-1 Gramian has no zero
    }
    res.total = res.boundary_term + res.puncture_term;
    return res;
}

/// Gauge-fixed holomorphic numeric frame for the frame-independence check:
/// kernel columns renormalized so two fixed Fourier coordinates form the
/// identity; ratios of kernel cofactors are holomorphic in k.
inline std::optional<Mat> holomorphic_numeric_frame(const FourierPotential& pot, Complex alpha,
                                                    const SectorPair& sp, Complex k, int rank,
                                                    const std::vector<int>& pivot_rows) {
    const SpMat D = build_D(pot, alpha, k, sp);
    auto ss = detail::smallest_singular(D, rank);
    Mat V = ss.vectors.leftCols(rank);
    Mat S(rank, rank);
    for (int r = 0; r < rank; ++r)
        for (int c = 0; c < rank; ++c) S(r, c) = V(pivot_rows[static_cast<std::size_t>(r)], c);
    Eigen::FullPivLU<Mat> lu(S);
    if (!lu.isInvertible()) return std::nullopt;
    return V * lu.inverse();
}

} // namespace chiralflat
