#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "chiralflat/errors.hpp"
#include "chiralflat/lattice.hpp"
#include "chiralflat/spectral.hpp"

namespace chiralflat {

// Jacobi theta_1(zeta | omega) at the fixed hexagonal modular parameter,
//   theta(z) = -sum_n exp(i pi (n+1/2)^2 omega + 2 pi i (n+1/2)(z + 1/2)),
// with simple zeros exactly on Lambda. The term count adapts to Im z so the
// series remainder stays below ~1e-16 relative on any bounded strip.

namespace theta_detail {

inline int cutoff(double imz) {
    return static_cast<int>(std::ceil(std::abs(imz) * 2.0 / std::sqrt(3.0))) + 9;
}

/// d^k/dz^k theta_1(z|omega) by term-wise differentiation.
inline Complex theta1_deriv(Complex z, int k) {
    const int N = cutoff(z.imag());
    Complex acc{0.0, 0.0};
    for (int n = -N; n <= N; ++n) {
        const double h = n + 0.5;
        const Complex expo = Complex(0.0, M_PI) * (h * h * lat::omega) +
                             Complex(0.0, 2.0 * M_PI * h) * (z + 0.5);
        Complex term = std::exp(expo);
        for (int d = 0; d < k; ++d) term *= Complex(0.0, 2.0 * M_PI * h);
        acc += term;
    }
    return -acc;
}

} // namespace theta_detail

inline Complex theta1(Complex z) { return theta_detail::theta1_deriv(z, 0); }
inline Complex theta1_d1(Complex z) { return theta_detail::theta1_deriv(z, 1); }

/// Distance from z to the lattice Lambda = omega Z + Z.
inline double lattice_distance(Complex z) {
    // coordinates z = x + y*omega
    const double y = z.imag() / lat::omega.imag();
    const double x = z.real() - y * lat::omega.real();
    double best = 1e300;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            const Complex g = (std::round(x) + dx) + (std::round(y) + dy) * lat::omega;
            best = std::min(best, std::abs(z - g));
        }
    return best;
}

/// Bloch multiplier F_k(z) = e^{(i/2)(z - conj z) k} theta(z - z(k))/theta(z);
/// Lambda-periodic in z, with a zero at z(k) mod Lambda and poles killed only
/// when multiplied against a function vanishing on Lambda.
inline Complex F_k(Complex k, Complex z) {
    if (lattice_distance(z) < 1e-10)
        throw pole_at("F_k evaluated within 1e-10 of a lattice point");
    const Complex w = z - std::conj(z);
    return std::exp(Complex(0.5) * Complex(0.0, 1.0) * w * k) * theta1(z - lat::z_map(k)) /
           theta1(z);
}

/// e_p(k) = theta(z(k)) / theta(z(k+p)) for p in Lambda*.
inline Complex e_p(Complex k, Complex p) { return theta1(lat::z_map(k)) / theta1(lat::z_map(k + p)); }

/// Weierstrass P and P' on Lambda via log-derivatives of theta_1:
/// P(z) = -d^2/dz^2 log theta + theta'''(0)/(3 theta'(0)).
inline Complex weierstrass_p(Complex z) {
    if (lattice_distance(z) < 1e-10) throw pole_at("weierstrass_p on a lattice point");
    static const Complex c =
        theta_detail::theta1_deriv(0.0, 3) / (3.0 * theta_detail::theta1_deriv(0.0, 1));
    const Complex t = theta1(z), t1 = theta_detail::theta1_deriv(z, 1),
                  t2 = theta_detail::theta1_deriv(z, 2);
    return -(t2 / t - (t1 / t) * (t1 / t)) + c;
}

inline Complex weierstrass_p_prime(Complex z) {
    if (lattice_distance(z) < 1e-10) throw pole_at("weierstrass_p_prime on a lattice point");
    const Complex t = theta1(z), t1 = theta_detail::theta1_deriv(z, 1),
                  t2 = theta_detail::theta1_deriv(z, 2), t3 = theta_detail::theta1_deriv(z, 3);
    return -(t3 / t - 3.0 * t2 * t1 / (t * t) + 2.0 * (t1 / t) * (t1 / t) * (t1 / t));
}

/// Real-space samples of a two-component coefficient vector on the M x M
/// half-offset grid over one fundamental cell z = (i+1/2)/M + (j+1/2)/M w.
struct SpinorField {
    int M{0};
    std::vector<Complex> comp1;  // row-major i*M + j
    std::vector<Complex> comp2;

    Complex z_at(int i, int j) const {
        return (i + 0.5) / double(M) + (j + 0.5) / double(M) * lat::omega;
    }
    double norm2_mean() const {
        double acc = 0.0;
        for (std::size_t t = 0; t < comp1.size(); ++t)
            acc += std::norm(comp1[t]) + std::norm(comp2[t]);
        return acc / double(comp1.size());
    }
};

/// Evaluates the Fourier sum of a kernel vector on the cell grid. Phases are
/// built per axis: <nu, z> = (i+1/2)/M <nu,1> + (j+1/2)/M <nu,omega>.
inline SpinorField sample_spinor(const Vec& coeffs, const SectorPair& sp, int M) {
    SpinorField f;
    f.M = M;
    f.comp1.assign(static_cast<std::size_t>(M) * M, Complex(0.0));
    f.comp2.assign(static_cast<std::size_t>(M) * M, Complex(0.0));
    const int dm = sp.minus.dim();
    std::vector<Complex> col(static_cast<std::size_t>(M)), row(static_cast<std::size_t>(M));
    auto add_mode = [&](std::vector<Complex>& dst, Complex c, Complex nu) {
        const double a1 = lat::pairing(nu, Complex(1.0, 0.0));
        const double a2 = lat::pairing(nu, lat::omega);
        for (int i = 0; i < M; ++i) col[static_cast<std::size_t>(i)] = std::exp(Complex(0.0, (i + 0.5) / M * a1));
        for (int j = 0; j < M; ++j) row[static_cast<std::size_t>(j)] = std::exp(Complex(0.0, (j + 0.5) / M * a2));
        for (int i = 0; i < M; ++i) {
            const Complex ci = c * col[static_cast<std::size_t>(i)];
            for (int j = 0; j < M; ++j) dst[static_cast<std::size_t>(i) * M + j] += ci * row[static_cast<std::size_t>(j)];
        }
    };
    for (int i = 0; i < dm; ++i)
        if (coeffs(i) != Complex(0.0)) add_mode(f.comp1, coeffs(i), sp.minus.mode(i).value());
    for (int i = 0; i < sp.plus.dim(); ++i)
        if (coeffs(dm + i) != Complex(0.0)) add_mode(f.comp2, coeffs(dm + i), sp.plus.mode(i).value());
    return f;
}

/// Evaluates the same Fourier sum at one arbitrary point.
inline std::pair<Complex, Complex> spinor_at(const Vec& coeffs, const SectorPair& sp, Complex z) {
    Complex u1{0.0}, u2{0.0};
    const int dm = sp.minus.dim();
    for (int i = 0; i < dm; ++i)
        u1 += coeffs(i) * std::exp(Complex(0.0, lat::pairing(sp.minus.mode(i).value(), z)));
    for (int i = 0; i < sp.plus.dim(); ++i)
        u2 += coeffs(dm + i) * std::exp(Complex(0.0, lat::pairing(sp.plus.mode(i).value(), z)));
    return {u1, u2};
}

struct ZeroRecord {
    Complex location;
    int order{0};
    double slope{0.0};       // fitted log-log slope before rounding
    double min_modulus{0.0};
};

/// Locates zeros of |u| over one cell from grid minima, refines each by local
/// pattern search, and estimates the vanishing order from the log-log slope
/// of |u| against distance over one decade of radii.
inline std::vector<ZeroRecord> zero_census(const Vec& coeffs, const SectorPair& sp, int M = 96,
                                           double seed_threshold = 5e-2,
                                           double accept_threshold = 1e-5,
                                           double slope_window = 0.2) {
    SpinorField f = sample_spinor(coeffs, sp, M);
    double mx = 0.0;
    for (std::size_t t = 0; t < f.comp1.size(); ++t)
        mx = std::max(mx, std::sqrt(std::norm(f.comp1[t]) + std::norm(f.comp2[t])));
    auto mod_at = [&](Complex z) {
        auto [u1, u2] = spinor_at(coeffs, sp, z);
        return std::sqrt(std::norm(u1) + std::norm(u2));
    };
    std::vector<ZeroRecord> zeros;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            const double v = std::sqrt(std::norm(f.comp1[static_cast<std::size_t>(i) * M + j]) +
                                       std::norm(f.comp2[static_cast<std::size_t>(i) * M + j]));
            if (v > seed_threshold * mx) continue;
            // local minimum among the 8 neighbours (periodic)
            bool isMin = true;
            for (int di = -1; di <= 1 && isMin; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (!di && !dj) continue;
                    const int ii = (i + di + M) % M, jj = (j + dj + M) % M;
                    const double w =
                        std::sqrt(std::norm(f.comp1[static_cast<std::size_t>(ii) * M + jj]) +
                                  std::norm(f.comp2[static_cast<std::size_t>(ii) * M + jj]));
                    if (w < v) {
                        isMin = false;
                        break;
                    }
                }
            if (!isMin) continue;
            // pattern-search refinement
            Complex z = f.z_at(i, j);
            double step = 1.0 / M, best = mod_at(z);
            for (int it = 0; it < 160 && step > 1e-12; ++it) {
                bool improved = false;
                for (int d = 0; d < 4; ++d) {
                    static const Complex dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                    const Complex zc = z + step * dirs[d];
                    const double vv = mod_at(zc);
                    if (vv < best) {
                        best = vv;
                        z = zc;
                        improved = true;
                    }
                }
                if (!improved) step *= 0.5;
            }
            if (best > accept_threshold * mx) continue;  // shallow minimum, not a zero
            ZeroRecord rec;
            rec.location = z;
            rec.min_modulus = best;
            // order from the slope over radii in [1e-3, 1e-2] of the cell size
            const double r1 = 1e-3, r2 = 1e-2;
            double s1 = 0.0, s2 = 0.0;
            for (int d = 0; d < 4; ++d) {
                static const Complex dirs[4] = {{1, 0}, {0, 1}, {-0.7071, 0.7071}, {0.7071, 0.7071}};
                s1 += mod_at(z + r1 * dirs[d]) / 4.0;
                s2 += mod_at(z + r2 * dirs[d]) / 4.0;
            }
            rec.slope = std::log10(s2 / s1);
            const double rounded = std::round(rec.slope);
            if (std::abs(rec.slope - rounded) > slope_window || rounded < 1)
                throw ill_conditioned_zero("slope fit " + std::to_string(rec.slope) +
                                           " not within the acceptance window of an integer");
            rec.order = static_cast<int>(rounded);
            // deduplicate against already recorded zeros
            bool dup = false;
            for (const auto& other : zeros)
                if (std::abs(other.location - z) < 3.0 / M) dup = true;
            if (!dup) zeros.push_back(rec);
        }
    return zeros;
}

/// Samples of G_{k,r}(z) = F_{k+r}(z) F_{-r}(z) u(z) for a kernel vector u of
/// D(alpha) (vanishing to second order at 0 when u is the L^2_{0,1} vector).
inline SpinorField flat_band_generator(const SpinorField& u, Complex k, Complex r) {
    SpinorField g;
    g.M = u.M;
    g.comp1.resize(u.comp1.size());
    g.comp2.resize(u.comp2.size());
    for (int i = 0; i < u.M; ++i)
        for (int j = 0; j < u.M; ++j) {
            const Complex z = u.z_at(i, j);
            const Complex f = F_k(k + r, z) * F_k(-r, z);
            g.comp1[static_cast<std::size_t>(i) * u.M + j] = f * u.comp1[static_cast<std::size_t>(i) * u.M + j];
            g.comp2[static_cast<std::size_t>(i) * u.M + j] = f * u.comp2[static_cast<std::size_t>(i) * u.M + j];
        }
    return g;
}

/// Projects a sampled spinor back onto the truncated Fourier basis.
inline Vec project_to_modes(const SpinorField& f, const SectorPair& sp) {
    Vec out = Vec::Zero(sp.dim());
    const int dm = sp.minus.dim();
    const int M = f.M;
    auto project_mode = [&](const std::vector<Complex>& comp, Complex nu) {
        const double a1 = lat::pairing(nu, Complex(1.0, 0.0));
        const double a2 = lat::pairing(nu, lat::omega);
        Complex acc{0.0};
        for (int i = 0; i < M; ++i) {
            Complex rowacc{0.0};
            const Complex pi_ = std::exp(Complex(0.0, -(i + 0.5) / M * a1));
            for (int j = 0; j < M; ++j)
                rowacc += comp[static_cast<std::size_t>(i) * M + j] *
                          std::exp(Complex(0.0, -(j + 0.5) / M * a2));
            acc += pi_ * rowacc;
        }
        return acc / double(M * M);
    };
    for (int i = 0; i < dm; ++i) out(i) = project_mode(f.comp1, sp.minus.mode(i).value());
    for (int i = 0; i < sp.plus.dim(); ++i)
        out(dm + i) = project_mode(f.comp2, sp.plus.mode(i).value());
    return out;
}

} // namespace chiralflat
