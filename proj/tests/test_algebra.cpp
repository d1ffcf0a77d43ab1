#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <set>

#include "chiralflat/cyclotomic.hpp"
#include "chiralflat/lattice.hpp"
#include "chiralflat/truncation.hpp"

using namespace chiralflat;

namespace {

std::mt19937 rng(20240817);

Rat random_rat() {
    std::uniform_int_distribution<int> num(-40, 40);
    std::uniform_int_distribution<int> den(1, 23);
    return Rat(num(rng), den(rng));
}

Cyclo random_cyclo() { return Cyclo(random_rat(), random_rat(), random_rat(), random_rat()); }

} // namespace

TEST_CASE("Eisenstein integers form a ring with nonnegative norm") {
    std::uniform_int_distribution<int> d(-50, 50);
    for (int t = 0; t < 100; ++t) {
        EisensteinInt x(d(rng), d(rng)), y(d(rng), d(rng)), z(d(rng), d(rng));
        REQUIRE((x * y) * z == x * (y * z));
        REQUIRE(x * (y + z) == x * y + x * z);
        REQUIRE(x.norm() >= 0);
        const Complex xe = x.embed(), ye = y.embed();
        REQUIRE(std::abs((x * y).embed() - xe * ye) < 1e-9 * (1.0 + std::abs(xe * ye)));
    }
    REQUIRE(EisensteinInt(0, 0).norm() == 0);
    REQUIRE(EisensteinInt(3, -2).norm() > 0);
    // omega^2 = -1 - omega
    EisensteinInt w(0, 1);
    REQUIRE(w * w == EisensteinInt(-1, -1));
}

TEST_CASE("Cyclo constants embed to the advertised values") {
    REQUIRE(std::abs(Cyclo::one().embed() - Complex(1.0, 0.0)) < 1e-15);
    REQUIRE(std::abs(Cyclo::omega().embed() - Complex(-0.5, std::sqrt(3.0) / 2)) < 1e-14);
    REQUIRE(std::abs(Cyclo::i().embed() - Complex(0.0, 1.0)) < 1e-14);
    REQUIRE(std::abs(Cyclo::sqrt3().embed() - Complex(std::sqrt(3.0), 0.0)) < 1e-14);
    // embed(pi * (4/3)/sqrt(3) as degree-1 PiGraded) = 4 pi/(3 sqrt 3)
    PiGraded g = PiGraded::term(1, Rat(4, 3) * Cyclo::sqrt3().inverse());
    REQUIRE(g.embed().real() == Catch::Approx(4.0 * M_PI / (3.0 * std::sqrt(3.0))).epsilon(1e-12));
    REQUIRE(std::abs(g.embed().imag()) < 1e-14);
}

TEST_CASE("Cyclo field axioms hold exactly on random triples") {
    for (int t = 0; t < 60; ++t) {
        Cyclo x = random_cyclo(), y = random_cyclo(), z = random_cyclo();
        REQUIRE((x * y) * z == x * (y * z));
        REQUIRE(x * (y + z) == x * y + x * z);
        REQUIRE(x + y == y + x);
        REQUIRE(x * y == y * x);
        if (!x.is_zero()) {
            REQUIRE(x * x.inverse() == Cyclo::one());
        }
    }
}

TEST_CASE("embed is a ring homomorphism to 1e-13 relative") {
    for (int t = 0; t < 60; ++t) {
        Cyclo x = random_cyclo(), y = random_cyclo();
        const Complex pe = (x * y).embed(), qe = x.embed() * y.embed();
        REQUIRE(std::abs(pe - qe) < 1e-13 * (1.0 + std::abs(qe)));
        REQUIRE(std::abs((x + y).embed() - (x.embed() + y.embed())) <
                1e-13 * (1.0 + std::abs(x.embed() + y.embed())));
    }
    // exact zero embeds to exactly zero
    REQUIRE(Cyclo::zero().embed() == Complex(0.0, 0.0));
    REQUIRE(PiGraded{}.embed() == Complex(0.0, 0.0));
}

TEST_CASE("conjugation and galois maps act correctly") {
    for (int t = 0; t < 20; ++t) {
        Cyclo x = random_cyclo();
        REQUIRE(std::abs(x.conj().embed() - std::conj(x.embed())) < 1e-12);
        REQUIRE(x.galois(5).galois(5) == x);  // 5*5 = 25 = 1 mod 12
    }
}

TEST_CASE("PiGraded multiplication adds degrees") {
    PiGraded a = PiGraded::term(1, Cyclo(Rat(3)));
    PiGraded b = PiGraded::term(-1, Cyclo(Rat(1, 2)));
    PiGraded p = a * b;
    REQUIRE(p.terms().size() == 1);
    REQUIRE(p.coeff(0) == Cyclo(Rat(3, 2)));
    PiGraded q = a * a;
    REQUIRE(q.coeff(2) == Cyclo(Rat(9)));
    REQUIRE(q.embed().real() == Catch::Approx(9.0 * M_PI * M_PI));
}

TEST_CASE("exact scalar strings round-trip") {
    for (int t = 0; t < 20; ++t) {
        PiGraded g = PiGraded::term(1, random_cyclo()) + PiGraded::term(0, random_cyclo()) +
                     PiGraded::term(-2, random_cyclo());
        REQUIRE(PiGraded::parse(g.str()) == g);
    }
    REQUIRE(rat_to_string(rat_from_string("-2430/49")) == "-2430/49");
    REQUIRE(PiGraded::parse("pi^1*(0,0,0,-4/3)").embed().imag() ==
            Catch::Approx(-4.0 * M_PI / 3.0));
}

TEST_CASE("rotate_mode has order three and preserves modulus") {
    std::uniform_int_distribution<int> d(-30, 30);
    for (int t = 0; t < 100; ++t) {
        ModeIndex mi{t % 2 ? Sector::plusK : Sector::minusK, d(rng), d(rng)};
        ModeIndex r = mi.rotated();
        REQUIRE(std::abs(r.value() - std::conj(lat::omega) * mi.value()) < 1e-9);
        REQUIRE(std::abs(std::abs(r.value()) - std::abs(mi.value())) < 1e-12 * std::abs(mi.value()));
        REQUIRE(r.rotated().rotated() == mi);
        // orbit has exactly three distinct elements (3K = 0 mod Lambda*, K not in Lambda*)
        auto orb = mi.orbit();
        REQUIRE_FALSE(orb[0] == orb[1]);
        REQUIRE_FALSE(orb[1] == orb[2]);
        REQUIRE_FALSE(orb[0] == orb[2]);
        // mode values never vanish
        REQUIRE(mi.norm2_over_K2() > 0);
        REQUIRE(std::abs(mi.value_over_K().embed() * lat::K - mi.value()) < 1e-9);
    }
}

TEST_CASE("kappa orbit: BM support, unit weight product, order three") {
    auto orb = kappa_orbit(0, 0);
    // the orbit of p = 0 generates the three BM modes K, wK, wbar K
    std::set<std::pair<std::int64_t, std::int64_t>> pts(
        {orb.points[0], orb.points[1], orb.points[2]});
    REQUIRE(pts == std::set<std::pair<std::int64_t, std::int64_t>>{{0, 0}, {-1, 1}, {-1, 0}});
    REQUIRE(std::abs(orb.weights[0] * orb.weights[1] * orb.weights[2] - Complex(1.0, 0.0)) <
            1e-14);
    std::uniform_int_distribution<int> d(-20, 20);
    for (int t = 0; t < 100; ++t) {
        std::int64_t a = d(rng), b = d(rng);
        auto p1 = kappa_once_plus(a, b);
        auto p2 = kappa_once_plus(p1.first, p1.second);
        auto p3 = kappa_once_plus(p2.first, p2.second);
        REQUIRE(p3 == std::make_pair(a, b));
        // the step is multiplication of the mode by conj(omega)
        const Complex eta = lat::K + lat::dual_point(a, b);
        const Complex eta1 = lat::K + lat::dual_point(p1.first, p1.second);
        REQUIRE(std::abs(eta1 - std::conj(lat::omega) * eta) < 1e-9);
    }
}

TEST_CASE("z_map sends the dual lattice into the lattice") {
    REQUIRE(std::abs(lat::z_map(Complex(0.0))) == 0.0);
    std::uniform_int_distribution<int> d(-10, 10);
    for (int t = 0; t < 10; ++t) {
        const std::int64_t a = d(rng), b = d(rng);
        const Complex z = lat::z_map(lat::dual_point(a, b));
        const EisensteinInt e = lat::z_map_exact(a, b);
        REQUIRE(std::abs(z - e.embed()) < 1e-10);
    }
    // z(q1) = -omega, z(q2) = 1
    REQUIRE(std::abs(lat::z_map(lat::q1) + lat::omega) < 1e-12);
    REQUIRE(std::abs(lat::z_map(lat::q2) - 1.0) < 1e-12);
}

TEST_CASE("dual pairing is 2 pi integral on the lattice") {
    for (std::int64_t m = -3; m <= 3; ++m)
        for (std::int64_t n = -3; n <= 3; ++n) {
            const Complex gamma = double(m) * lat::omega + double(n);
            for (const Complex q : {lat::q1, lat::q2}) {
                const double v = lat::pairing(gamma, q) / (2.0 * M_PI);
                REQUIRE(std::abs(v - std::round(v)) < 1e-12);
            }
        }
}

TEST_CASE("orbit partition covers each truncated sector exactly once") {
    for (Sector s : {Sector::minusK, Sector::plusK}) {
        SectorModes modes(s, TruncationParams{6});
        REQUIRE(modes.dim() == 3 * modes.orbit_count());
        std::set<std::pair<std::int64_t, std::int64_t>> seen;
        for (int i = 0; i < modes.dim(); ++i) {
            const auto& mi = modes.mode(i);
            REQUIRE(seen.insert({mi.m, mi.n}).second);
            // closure under rotation with consistent index bookkeeping
            const int ri = modes.rotated_index(i);
            REQUIRE(ri >= 0);
            REQUIRE(modes.mode(ri) == mi.rotated());
            REQUIRE(modes.find(mi.m, mi.n) == i);
        }
        // the ball itself is contained
        for (std::int64_t m = -6; m <= 6; ++m)
            for (std::int64_t n = -6; n <= 6; ++n) REQUIRE(modes.find(m, n) >= 0);
    }
}
