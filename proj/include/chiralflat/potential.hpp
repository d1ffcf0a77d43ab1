#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chiralflat/cyclotomic.hpp"
#include "chiralflat/lattice.hpp"

namespace chiralflat {

enum class SymmetryClass { chiral_physical, rotational_only };

/// One Fourier coefficient. `exact` is meaningful only when `has_exact`;
/// `numeric` always carries the value used for matrix assembly (the floating
/// potential scale is already folded in).
struct Coeff {
    PiGraded exact;
    Complex numeric{0.0, 0.0};
    bool has_exact{false};

    static Coeff from_exact(PiGraded e, double scale) {
        Coeff c;
        c.numeric = e.embed() * scale;
        c.exact = std::move(e);
        c.has_exact = true;
        return c;
    }
    static Coeff from_numeric(Complex v) {
        Coeff c;
        c.numeric = v;
        return c;
    }
};

using OffsetKey = std::pair<std::int64_t, std::int64_t>;

/// Tunnelling potential as Fourier coefficient maps.
///
/// U_+ has modes eta = K + a q1 + b q2 (keys (a,b) in `plus`), U_- has modes
/// mu = -K + a q1 + b q2 (keys in `minus`). Coefficients are stored exactly
/// when possible and lowered to floating complex at assembly time, so one
/// object feeds both the exact trace engine and the numeric eigensolvers.
/// A non-representable overall scale (the 1/sqrt(2) of U2) is kept as
/// `scale_sq` (exact square); the exact maps then describe the scaled-up
/// potential and the trace engine divides results by scale_sq^l per power.
class FourierPotential {
public:
    std::map<OffsetKey, Coeff> plus;
    std::map<OffsetKey, Coeff> minus;
    SymmetryClass symmetry_class{SymmetryClass::chiral_physical};
    /// Exact square of the floating scale multiplying the exact coefficient
    /// set (1 when the set is already the potential itself).
    Rat scale_sq{1};
    std::string name;

    double scale() const { return std::sqrt(to_double(scale_sq)); }

    bool all_exact() const {
        for (const auto& [k, c] : plus)
            if (!c.has_exact) return false;
        for (const auto& [k, c] : minus)
            if (!c.has_exact) return false;
        return true;
    }

    /// Completes a kappa-orbit from its representative: the weight along the
    /// traversal eta -> conj(omega) eta is conj(omega) per step.
    void add_plus_orbit(std::int64_t a, std::int64_t b, const Coeff& rep) {
        const Cyclo wbar = Cyclo::omega().conj();
        const Complex wbar_n = std::conj(lat::omega);
        Coeff c = rep;
        std::int64_t ca = a, cb = b;
        for (int t = 0; t < 3; ++t) {
            plus[{ca, cb}] = c;
            auto nx = kappa_once_plus(ca, cb);
            ca = nx.first;
            cb = nx.second;
            c.numeric *= wbar_n;
            if (c.has_exact) c.exact = PiGraded::term(0, wbar) * c.exact;
        }
    }
    void add_minus_orbit(std::int64_t a, std::int64_t b, const Coeff& rep) {
        const Cyclo wbar = Cyclo::omega().conj();
        const Complex wbar_n = std::conj(lat::omega);
        Coeff c = rep;
        std::int64_t ca = a, cb = b;
        for (int t = 0; t < 3; ++t) {
            minus[{ca, cb}] = c;
            auto nx = kappa_once_minus(ca, cb);
            ca = nx.first;
            cb = nx.second;
            c.numeric *= wbar_n;
            if (c.has_exact) c.exact = PiGraded::term(0, wbar) * c.exact;
        }
    }

    /// Rebuilds U_-(z) := U_+(-z): mode -eta lands at minus-key (-a,-b).
    void derive_minus_from_plus() {
        minus.clear();
        for (const auto& [k, c] : plus) minus[{-k.first, -k.second}] = c;
    }

    Complex u_plus_value(Complex z) const {
        Complex acc{0.0, 0.0};
        for (const auto& [k, c] : plus) {
            const Complex eta = lat::K + lat::dual_point(k.first, k.second);
            acc += c.numeric * std::exp(Complex(0.0, lat::pairing(eta, z)));
        }
        return acc;
    }
    Complex u_minus_value(Complex z) const {
        Complex acc{0.0, 0.0};
        for (const auto& [k, c] : minus) {
            const Complex mu = -lat::K + lat::dual_point(k.first, k.second);
            acc += c.numeric * std::exp(Complex(0.0, lat::pairing(mu, z)));
        }
        return acc;
    }

    /// V(z) = [[0, U_+(z)], [U_-(z), 0]] as row-major 2x2 entries.
    std::array<Complex, 4> evaluate(Complex z) const {
        return {Complex(0.0), u_plus_value(z), u_minus_value(z), Complex(0.0)};
    }

    /// Anti-chiral companion 2 d/dz U_+ (mode-wise exact derivative):
    /// the coefficient at eta becomes i * conj(eta) * a_eta.
    FourierPotential antichiral_derivative() const {
        FourierPotential v = *this;
        v.name = name.empty() ? "antichiral" : ("2dz_" + name);
        v.plus.clear();
        v.minus.clear();
        for (const auto& [k, c] : plus) {
            const Complex eta = lat::K + lat::dual_point(k.first, k.second);
            Coeff d;
            d.numeric = Complex(0.0, 1.0) * std::conj(eta) * c.numeric;
            if (c.has_exact) {
                // i conj(eta) = i K conj(w) = pi * (4/3) i conj(w)
                ModeIndex mi{Sector::plusK, k.first, k.second};
                Cyclo w = mi.value_over_K();
                d.exact = PiGraded::term(1, Rat(4, 3) * (Cyclo::i() * w.conj())) * c.exact;
                d.has_exact = true;
            }
            v.plus[k] = d;
        }
        for (const auto& [k, c] : minus) {
            const Complex mu = -lat::K + lat::dual_point(k.first, k.second);
            Coeff d;
            d.numeric = Complex(0.0, 1.0) * std::conj(mu) * c.numeric;
            if (c.has_exact) {
                ModeIndex mi{Sector::minusK, k.first, k.second};
                Cyclo w = mi.value_over_K();
                d.exact = PiGraded::term(1, Rat(4, 3) * (Cyclo::i() * w.conj())) * c.exact;
                d.has_exact = true;
            }
            v.minus[k] = d;
        }
        return v;
    }
};

/// Rescaled Bistritzer-MacDonald potential: the single kappa-orbit of p = 0,
/// coefficients -(4 pi/3) i omega^l at modes K omega^l (degree 1 in pi).
inline FourierPotential build_u1() {
    FourierPotential p;
    p.name = "u1";
    const PiGraded c0 = PiGraded::term(1, Rat(-4, 3) * Cyclo::i());
    p.add_plus_orbit(0, 0, Coeff::from_exact(c0, 1.0));
    p.derive_minus_from_plus();
    return p;
}

/// Second example potential: two orbits, modes K omega^l and -2K omega^l,
/// overall factor 1/sqrt(2) kept as a floating scale on an exact set.
inline FourierPotential build_u2() {
    FourierPotential p;
    p.name = "u2";
    p.scale_sq = Rat(1, 2);
    const double s = p.scale();
    const PiGraded c0 = PiGraded::term(1, Rat(-4, 3) * Cyclo::i());
    p.add_plus_orbit(0, 0, Coeff::from_exact(c0, s));
    p.add_plus_orbit(-2, 1, Coeff::from_exact(Rat(-1) * c0, s));
    p.derive_minus_from_plus();
    return p;
}

/// Interpolation family U_theta = cos(theta) U1 + sin(theta) S where
/// S = U1 - sqrt(2) U2 (the second exponential sum). Endpoints:
/// theta = 0 gives U1 exactly and theta = 2 pi 7/8 gives U2.
inline FourierPotential build_interpolated(double theta) {
    if (!std::isfinite(theta)) throw error("build_interpolated: theta must be finite");
    FourierPotential p;
    p.name = "interp";
    const PiGraded c0e = PiGraded::term(1, Rat(-4, 3) * Cyclo::i());
    const Complex c0 = c0e.embed();
    const double ct = std::cos(theta), st = std::sin(theta);
    if (st == 0.0 && ct == 1.0) return build_u1();
    p.add_plus_orbit(0, 0, Coeff::from_numeric(ct * c0));
    if (st != 0.0) p.add_plus_orbit(-2, 1, Coeff::from_numeric(st * c0));
    p.derive_minus_from_plus();
    return p;
}

struct ValidationIssue {
    std::string what;
    OffsetKey at{0, 0};
};

struct ValidationReport {
    bool rotational_ok{true};
    bool chiral_physical_ok{true};
    std::vector<ValidationIssue> issues;

    bool pass(SymmetryClass required) const {
        if (!rotational_ok) return false;
        return required == SymmetryClass::rotational_only || chiral_physical_ok;
    }
};

/// Checks the orbit constraint (exactly on exact coefficients, to `tol`
/// otherwise) and, for chiral_physical potentials, U_-(z) = U_+(-z) plus the
/// reality condition conj(U(conj z)) = -U(-z) on coefficients.
inline ValidationReport validate(const FourierPotential& p, double tol = 1e-12) {
    ValidationReport r;
    const Complex wbar_n = std::conj(lat::omega);
    const Cyclo wbar = Cyclo::omega().conj();
    auto check_orbit = [&](const std::map<OffsetKey, Coeff>& coeffs, bool plus_side) {
        for (const auto& [k, c] : coeffs) {
            auto nx = plus_side ? kappa_once_plus(k.first, k.second)
                                : kappa_once_minus(k.first, k.second);
            auto it = coeffs.find({nx.first, nx.second});
            if (it == coeffs.end()) {
                r.rotational_ok = false;
                r.issues.push_back({"orbit image missing", k});
                continue;
            }
            if (c.has_exact && it->second.has_exact) {
                if (!(it->second.exact == PiGraded::term(0, wbar) * c.exact)) {
                    r.rotational_ok = false;
                    r.issues.push_back({"exact orbit weight violated", k});
                }
            } else if (std::abs(it->second.numeric - wbar_n * c.numeric) >
                       tol * (1.0 + std::abs(c.numeric))) {
                r.rotational_ok = false;
                r.issues.push_back({"orbit weight violated", k});
            }
        }
    };
    check_orbit(p.plus, true);
    check_orbit(p.minus, false);

    // U_-(z) = U_+(-z): minus key (-a,-b) must carry the plus coefficient.
    for (const auto& [k, c] : p.plus) {
        auto it = p.minus.find({-k.first, -k.second});
        if (it == p.minus.end() ||
            std::abs(it->second.numeric - c.numeric) > tol * (1.0 + std::abs(c.numeric))) {
            r.chiral_physical_ok = false;
            r.issues.push_back({"U_- != U_+(-.)", k});
        }
    }
    if (p.minus.size() != p.plus.size()) r.chiral_physical_ok = false;
    // conj(a_(a,b)) = -a_(a,-a-b) (modes eta and conj(eta)).
    for (const auto& [k, c] : p.plus) {
        auto it = p.plus.find({k.first, -k.first - k.second});
        if (it == p.plus.end() ||
            std::abs(std::conj(c.numeric) + it->second.numeric) >
                tol * (1.0 + std::abs(c.numeric))) {
            r.chiral_physical_ok = false;
            r.issues.push_back({"reality condition violated", k});
        }
    }
    return r;
}

/// Coefficient-wise linear combination a*P + b*Q (numeric; exactness is kept
/// only when a, b are trivial).
inline FourierPotential linear_combination(Complex a, const FourierPotential& P, Complex b,
                                           const FourierPotential& Q) {
    FourierPotential r;
    r.name = "lincomb";
    r.symmetry_class = (P.symmetry_class == SymmetryClass::chiral_physical &&
                        Q.symmetry_class == SymmetryClass::chiral_physical)
                           ? SymmetryClass::chiral_physical
                           : SymmetryClass::rotational_only;
    auto acc = [&](std::map<OffsetKey, Coeff>& dst, const std::map<OffsetKey, Coeff>& src,
                   Complex f) {
        for (const auto& [k, c] : src) {
            auto& slot = dst[k];
            slot.numeric += f * c.numeric;
            slot.has_exact = false;
        }
    };
    acc(r.plus, P.plus, a);
    acc(r.plus, Q.plus, b);
    acc(r.minus, P.minus, a);
    acc(r.minus, Q.minus, b);
    return r;
}

} // namespace chiralflat
