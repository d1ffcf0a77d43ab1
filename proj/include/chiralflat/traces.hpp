#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "chiralflat/fourier_ops.hpp"

namespace chiralflat {

/// Subspace tag: 0, 1, 2 or kFullSpace for the whole L^2_0 sector.
constexpr int kFullSpace = -1;

struct TraceResult {
    int ell{2};
    int subspace{kFullSpace};
    Complex numeric_value{0.0, 0.0};   // extrapolated
    Complex last_raw{0.0, 0.0};        // value at the largest truncation
    std::optional<PiGraded> exact_part;
    std::vector<int> N_sequence;
    bool extrapolated{false};
};

namespace detail {

/// tr(X Y) for sparse X, Y of matching square dims.
inline Complex trace_product(const SpMat& X, const SpMat& Y) {
    Complex acc{0.0, 0.0};
    for (int col = 0; col < X.outerSize(); ++col)
        for (SpMat::InnerIterator it(X, col); it; ++it)
            acc += it.value() * Y.coeff(col, static_cast<int>(it.row()));
    return acc;
}

/// tr(A^l), sparse path (l <= 6).
inline Complex sparse_power_trace(const SpMat& A, int l) {
    switch (l) {
        case 1: {
            Complex acc{0, 0};
            for (int c = 0; c < A.outerSize(); ++c)
                for (SpMat::InnerIterator it(A, c); it; ++it)
                    if (it.row() == c) acc += it.value();
            return acc;
        }
        case 2: return trace_product(A, A);
        case 3: {
            SpMat A2 = (A * A).pruned();
            return trace_product(A2, A);
        }
        case 4: {
            SpMat A2 = (A * A).pruned();
            return trace_product(A2, A2);
        }
        case 5: {
            SpMat A2 = (A * A).pruned();
            SpMat A3 = (A2 * A).pruned();
            return trace_product(A3, A2);
        }
        case 6: {
            SpMat A2 = (A * A).pruned();
            SpMat A3 = (A2 * A).pruned();
            return trace_product(A3, A3);
        }
        default: throw error("power trace supports 1 <= l <= 6");
    }
}

inline Complex dense_power_trace(const Mat& B, int l) {
    Mat P = B;
    for (int t = 1; t < l; ++t) P = P * B;
    return P.trace();
}

/// Two-point Richardson in 1/N^2 on the last pair of a schedule.
inline Complex richardson(const std::vector<int>& Ns, const std::vector<Complex>& vals) {
    const std::size_t n = Ns.size();
    const double a = double(Ns[n - 2]) * double(Ns[n - 2]);
    const double b = double(Ns[n - 1]) * double(Ns[n - 1]);
    return (b * vals[n - 1] - a * vals[n - 2]) / (b - a);
}

} // namespace detail

/// Default truncation schedule for trace extrapolation.
inline std::vector<int> default_trace_schedule() { return {12, 16, 20}; }

/// Trace of A_0^ell on the full sector or on one rotational subspace, with
/// Richardson extrapolation in 1/N^2 over the schedule. A three-point
/// consistency check guards the extrapolation when the schedule allows it.
inline TraceResult numeric_trace(const FourierPotential& pot, int ell, int subspace,
                                 std::vector<int> schedule = default_trace_schedule(),
                                 double rtol = 1e-4) {
    if (ell < 2) throw error("numeric_trace requires ell >= 2");
    if (schedule.size() < 2) throw error("numeric_trace needs a schedule of >= 2 truncations");
    std::sort(schedule.begin(), schedule.end());
    std::vector<Complex> vals;
    for (int N : schedule) {
        SectorPair sp(TruncationParams{N});
        if (subspace == kFullSpace) {
            const SpMat A = build_Ak(pot, Complex(0.0), sp);
            vals.push_back(detail::sparse_power_trace(A, ell));
        } else {
            const SpMat A = build_Ak(pot, Complex(0.0), sp);
            const Mat B = restrict_subspace(A, subspace, sp.minus);
            vals.push_back(detail::dense_power_trace(B, ell));
        }
    }
    TraceResult r;
    r.ell = ell;
    r.subspace = subspace;
    r.N_sequence = schedule;
    r.last_raw = vals.back();
    r.numeric_value = detail::richardson(schedule, vals);
    r.extrapolated = true;
    if (schedule.size() >= 3) {
        std::vector<int> prevN(schedule.begin(), schedule.end() - 1);
        std::vector<Complex> prevV(vals.begin(), vals.end() - 1);
        const Complex prev = detail::richardson(prevN, prevV);
        if (std::abs(prev - r.numeric_value) >
            rtol * (1.0 + std::abs(r.numeric_value)) * 10.0)
            throw non_convergent("trace extrapolants disagree beyond tolerance");
    }
    return r;
}

namespace detail {

struct ExactPot {
    // (shift key, coefficient, pi-degree); coefficients of the *scaled* set
    std::vector<std::pair<OffsetKey, Cyclo>> plus, minus;
    int degree{1};
};

inline ExactPot extract_exact(const FourierPotential& pot) {
    if (!pot.all_exact())
        throw inexact_coefficients(
            "potential has floating coefficients; exact traces need the exact "
            "(scaled) coefficient set");
    ExactPot e;
    std::optional<int> deg;
    auto pull = [&](const std::map<OffsetKey, Coeff>& src,
                    std::vector<std::pair<OffsetKey, Cyclo>>& dst) {
        for (const auto& [k, c] : src) {
            const auto& terms = c.exact.terms();
            if (terms.size() != 1)
                throw inexact_coefficients("exact engine expects single pi-degree coefficients");
            const auto& [d, cy] = *terms.begin();
            if (!deg) deg = d;
            if (*deg != d)
                throw inexact_coefficients("exact engine expects a uniform pi-degree");
            dst.emplace_back(k, cy);
        }
    };
    pull(pot.plus, e.plus);
    pull(pot.minus, e.minus);
    e.degree = deg.value_or(1);
    return e;
}

/// 1/w for w = A + B zeta^2 (modes over K live in Z[zeta^2]):
/// w^{-1} = ((A+B) - B zeta^2) / (A^2 + AB + B^2).
inline Cyclo mode_inverse(const ModeIndex& mi) {
    const Int A = Int(static_cast<int>(mi.sector) + mi.m - mi.n);
    const Int B = Int(mi.m + 2 * mi.n);
    const Int den = A * A + A * B + B * B;
    return Cyclo(Rat(A + B, den), Rat(0), Rat(-B, den), Rat(0));
}

using Key = std::pair<std::int64_t, std::int64_t>;

} // namespace detail

/// Exact remainder R_{l,j} = sum_{nu} sum_{r=1,2} w^{jr} <A_0^l e_nu, e_{w^r nu}>,
/// evaluated by dynamic programming over the alternating shift/resolvent paths
/// of length 2l. Only sources with |nu| <= l K can contribute (the offset
/// |w^r nu - nu| = sqrt(3)|nu| must stay within the reach of l net shifts).
/// The result is an element of Q(zeta_12) (degree 0 in pi for the
/// Theorem-class potentials); the scale_sq^l of a scaled coefficient set is
/// folded back in, so the value refers to the potential itself.
inline PiGraded exact_remainder(const FourierPotential& pot, int ell, int j) {
    if (ell < 2 || ell > 6) throw error("exact_remainder supports 2 <= ell <= 6");
    const detail::ExactPot ep = detail::extract_exact(pot);

    const Int reach2 = Int(ell) * Int(ell);
    Cyclo total = Cyclo::zero();
    const Cyclo wph = Cyclo::omega();

    // enumerate sources in the component-1 sector
    const std::int64_t box = 2 * ell + 2;
    for (std::int64_t m = -box; m <= box; ++m)
        for (std::int64_t n = -box; n <= box; ++n) {
            const ModeIndex src{Sector::minusK, m, n};
            if (src.norm2_over_K2() > reach2) continue;

            std::map<detail::Key, Cyclo> cur;
            cur[{m, n}] = Cyclo::one();
            for (int step = 0; step < ell; ++step) {
                std::map<detail::Key, Cyclo> mid;
                for (const auto& [key, val] : cur)
                    for (const auto& [sh, pc] : ep.minus) {
                        const ModeIndex t{Sector::plusK, key.first + sh.first - 2,
                                          key.second + sh.second + 1};
                        Cyclo acc = val * pc;
                        acc *= Rat(3, 4) * detail::mode_inverse(t);
                        auto [it, fresh] = mid.try_emplace(detail::Key{t.m, t.n}, acc);
                        if (!fresh) it->second += acc;
                    }
                std::map<detail::Key, Cyclo> nxt;
                for (const auto& [key, val] : mid)
                    for (const auto& [sh, pc] : ep.plus) {
                        const ModeIndex t{Sector::minusK, key.first + sh.first + 2,
                                          key.second + sh.second - 1};
                        Cyclo acc = val * pc;
                        acc *= Rat(3, 4) * detail::mode_inverse(t);
                        auto [it, fresh] = nxt.try_emplace(detail::Key{t.m, t.n}, acc);
                        if (!fresh) it->second += acc;
                    }
                cur = std::move(nxt);
            }

            // targets: omega^1 nu = rotated twice, omega^2 nu = rotated once
            const ModeIndex r1t = src.rotated();          // conj(omega) nu -> r = 2
            const ModeIndex r2t = r1t.rotated();          // omega nu       -> r = 1
            const std::array<std::pair<int, detail::Key>, 2> targets{
                std::pair<int, detail::Key>{1, {r2t.m, r2t.n}},
                std::pair<int, detail::Key>{2, {r1t.m, r1t.n}}};
            for (const auto& [r, tk] : targets) {
                auto it = cur.find(tk);
                if (it == cur.end()) continue;
                Cyclo ph = Cyclo::one();
                for (int t = 0; t < (j * r) % 3; ++t) ph *= wph;
                total += ph * it->second;
            }
        }

    // fold the potential scale back in: R(s P) = s^{2l} R(P) with s^2 exact
    Rat s2l(1);
    for (int t = 0; t < ell; ++t) s2l *= pot.scale_sq;
    const int deg = 2 * ell * (ep.degree - 1);
    return PiGraded::term(deg, s2l * total);
}

/// tr(A_0^l |_{L^2_{0,j}}) = (1/3) tr(A_0^l) + (1/3) R_{l,j}: the full trace
/// is extrapolated numerically, the remainder is exact.
inline TraceResult subspace_trace(const FourierPotential& pot, int ell, int j,
                                  std::vector<int> schedule = default_trace_schedule()) {
    TraceResult full = numeric_trace(pot, ell, kFullSpace, schedule);
    PiGraded R = exact_remainder(pot, ell, j);
    TraceResult r;
    r.ell = ell;
    r.subspace = j;
    r.N_sequence = full.N_sequence;
    r.extrapolated = true;
    r.exact_part = R;
    r.numeric_value = (full.numeric_value + R.embed()) / 3.0;
    r.last_raw = (full.last_raw + R.embed()) / 3.0;
    return r;
}

struct CriterionReport {
    bool holds{false};
    double lhs{0.0};   // tr(A^2) tr(A^4)
    double rhs{0.0};   // tr(A^3)^2
    std::array<double, 3> traces{};  // tr(A^2), tr(A^3), tr(A^4)
};

/// Interpolation-inequality test: tr(A^2) tr(A^4) < tr(A^3)^2 certifies a
/// non-real eigenvalue on the chosen restriction (real spectra satisfy the
/// opposite inequality by Cauchy-Schwarz).
inline CriterionReport nonreal_criterion(const FourierPotential& pot, int subspace,
                                         std::vector<int> schedule = default_trace_schedule()) {
    CriterionReport rep;
    for (int l = 2; l <= 4; ++l) {
        TraceResult t = (subspace == kFullSpace || !pot.all_exact())
                            ? numeric_trace(pot, l, subspace, schedule)
                            : subspace_trace(pot, l, subspace, schedule);
        rep.traces[static_cast<std::size_t>(l - 2)] = t.numeric_value.real();
    }
    rep.lhs = rep.traces[0] * rep.traces[2];
    rep.rhs = rep.traces[1] * rep.traces[1];
    rep.holds = rep.lhs < rep.rhs;
    return rep;
}

struct SweepRow {
    double theta{0.0};
    double tr_full{0.0};
    std::array<double, 3> tr_sub{};
};

/// Per-theta subspace traces of A_0^2 for the interpolation family, with the
/// decomposition identity available to the caller row by row.
inline std::vector<SweepRow> theta_sweep(const std::vector<double>& thetas,
                                         std::vector<int> schedule = {10, 14}) {
    std::vector<SweepRow> rows;
    rows.reserve(thetas.size());
    for (double th : thetas) {
        FourierPotential p = build_interpolated(th);
        SweepRow row;
        row.theta = th;
        row.tr_full = numeric_trace(p, 2, kFullSpace, schedule).numeric_value.real();
        for (int j = 0; j < 3; ++j)
            row.tr_sub[static_cast<std::size_t>(j)] =
                numeric_trace(p, 2, j, schedule).numeric_value.real();
        rows.push_back(row);
    }
    return rows;
}

} // namespace chiralflat
