#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "chiralflat/cyclotomic.hpp"
#include "chiralflat/errors.hpp"

namespace chiralflat {

// Rescaled moire geometry. Everything in this library lives on the lattice
// Lambda = omega*Z + Z with omega = e^{2 pi i/3}. The pairing is
// <z,w> = Re(z * conj(w)); the dual lattice Lambda* is spanned by q1, q2 with
// <gamma, q_j> in 2 pi Z, and the Dirac momentum is K = 4 pi/3 with
// 3K = 2 q1 - q2 in Lambda* (so K itself is not a dual point).
namespace lat {

inline const Complex omega{-0.5, 0.8660254037844386467637231707529362};
inline constexpr double K = 4.0 * M_PI / 3.0;
inline const Complex q1{2.0 * M_PI, 2.0 * M_PI / 1.7320508075688772935274463415059};
inline const Complex q2{0.0, 4.0 * M_PI / 1.7320508075688772935274463415059};

inline double pairing(Complex z, Complex w) { return (z * std::conj(w)).real(); }

/// Rescaling map z(k) = sqrt(3) k / (4 pi i); maps Lambda* onto Lambda.
inline Complex z_map(Complex k) {
    return std::sqrt(3.0) * k / (Complex(0.0, 4.0 * M_PI));
}

/// Exact image of a dual point p = a q1 + b q2 under z_map:
/// z(q1) = -omega, z(q2) = 1.
inline EisensteinInt z_map_exact(std::int64_t a, std::int64_t b) {
    return EisensteinInt(Int(b), Int(-a));
}

/// Dual-lattice point a q1 + b q2.
inline Complex dual_point(std::int64_t a, std::int64_t b) {
    return double(a) * q1 + double(b) * q2;
}

} // namespace lat

enum class Sector : std::int8_t { minusK = -1, plusK = +1 };

inline Sector other(Sector s) { return s == Sector::plusK ? Sector::minusK : Sector::plusK; }

/// Fourier mode nu = s*K + m q1 + n q2 of the scalar space carried by one
/// spinor component (component 1 <-> sector -K, component 2 <-> sector +K).
struct ModeIndex {
    Sector sector{Sector::minusK};
    std::int64_t m{0};
    std::int64_t n{0};

    friend bool operator==(const ModeIndex& x, const ModeIndex& y) {
        return x.sector == y.sector && x.m == y.m && x.n == y.n;
    }
    friend bool operator<(const ModeIndex& x, const ModeIndex& y) {
        if (x.sector != y.sector) return x.sector < y.sector;
        if (x.m != y.m) return x.m < y.m;
        return x.n < y.n;
    }

    Complex value() const {
        return double(static_cast<int>(sector)) * lat::K + lat::dual_point(m, n);
    }

    /// nu = K * w with w = (s + m - n) + (m + 2n) zeta^2 in Z[zeta^2];
    /// nonzero for every index since K is not a dual point.
    Cyclo value_over_K() const {
        const std::int64_t s = static_cast<int>(sector);
        return Cyclo(Rat(Int(s + m - n)), Rat(0), Rat(Int(m + 2 * n)), Rat(0));
    }

    /// Squared modulus of value_over_K as an integer: a^2 + a b + b^2 for
    /// w = a + b zeta^2 (zeta^2 = e^{i pi/3}).
    Int norm2_over_K2() const {
        const Int a = Int(static_cast<int>(sector) + m - n);
        const Int b = Int(m + 2 * n);
        return a * a + a * b + b * b;
    }

    /// Index of conj(omega) * nu; stays in the same sector, order 3.
    ModeIndex rotated() const {
        if (sector == Sector::plusK) return {sector, n - 1, -m - n};
        return {sector, n + 1, -m - n};
    }

    /// The three-element rotation orbit [nu] = {nu, omega nu, conj(omega) nu}.
    std::array<ModeIndex, 3> orbit() const {
        const ModeIndex r1 = rotated();        // conj(omega) nu
        const ModeIndex r2 = r1.rotated();     // omega nu
        return {*this, r2, r1};
    }
};

/// kappa-orbit of a dual-lattice offset for U_+ modes eta = K + a q1 + b q2:
/// traversal eta -> conj(omega) eta with coefficient weights {1, wbar, wbar^2}.
struct KappaOrbit {
    std::array<std::pair<std::int64_t, std::int64_t>, 3> points;
    std::array<Complex, 3> weights;
};

inline std::pair<std::int64_t, std::int64_t> kappa_once_plus(std::int64_t a, std::int64_t b) {
    // conj(omega)(K + a q1 + b q2) = K + (b - 1) q1 + (-a - b) q2
    return {b - 1, -a - b};
}
inline std::pair<std::int64_t, std::int64_t> kappa_once_minus(std::int64_t a, std::int64_t b) {
    // conj(omega)(-K + a q1 + b q2) = -K + (b + 1) q1 + (-a - b) q2
    return {b + 1, -a - b};
}

inline KappaOrbit kappa_orbit(std::int64_t a, std::int64_t b, Sector s = Sector::plusK) {
    KappaOrbit o;
    o.points[0] = {a, b};
    auto step = (s == Sector::plusK) ? kappa_once_plus : kappa_once_minus;
    o.points[1] = step(a, b);
    o.points[2] = step(o.points[1].first, o.points[1].second);
    const Complex wbar = std::conj(lat::omega);
    o.weights = {Complex(1.0, 0.0), wbar, wbar * wbar};
    return o;
}

} // namespace chiralflat
