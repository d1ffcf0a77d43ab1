#include <catch2/catch_amalgamated.hpp>

#include "chiralflat/bands.hpp"

using namespace chiralflat;

namespace {
const Complex kAlpha2{0.8537985486521775, 0.0};
}

TEST_CASE("singular values of D agree with the doubled Hermitian spectrum") {
    FourierPotential u2 = build_u2();
    SectorPair sp(TruncationParams{5});
    const Complex k{0.3, 0.22};
    const Mat D = Mat(build_D(u2, Complex(0.6), k, sp));
    const int n = static_cast<int>(D.rows());
    Mat H = Mat::Zero(2 * n, 2 * n);
    H.block(n, 0, n, n) = D;
    H.block(0, n, n, n) = D.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXd sv = bands_at_dense(u2, Complex(0.6), k, TruncationParams{5});
    // particle-hole symmetry of the doubled spectrum
    for (int i = 0; i < n; ++i)
        REQUIRE(ev(i) == Catch::Approx(-ev(2 * n - 1 - i)).margin(1e-10));
    // positive half equals the singular values
    for (int i = 0; i < n; ++i)
        REQUIRE(ev(n + i) == Catch::Approx(sv(i)).margin(1e-10));
}

TEST_CASE("free Dirac operator has a zero mode at the Dirac point") {
    FourierPotential u1 = build_u1();
    Eigen::VectorXd e = bands_at(u1, Complex(0.0), Complex(lat::K, 0.0), TruncationParams{8});
    REQUIRE(e(0) < 1e-12);
}

TEST_CASE("E_1(alpha, +-K) = 0 for non-magic alpha") {
    FourierPotential u1 = build_u1();
    for (double s : {1.0, -1.0}) {
        Eigen::VectorXd e =
            bands_at(u1, Complex(0.5), Complex(s * lat::K, 0.0), TruncationParams{10});
        REQUIRE(e(0) < 1e-8);
        REQUIRE(e(1) > 1e-3);
    }
    // no flat band away from the Dirac set
    Eigen::VectorXd g = bands_at(u1, Complex(0.5), Complex(0.0), TruncationParams{10});
    REQUIRE(g(0) > 1e-2);
}

TEST_CASE("flat pair at the first u2 magic angle") {
    FourierPotential u2 = build_u2();
    Eigen::VectorXd e = bands_at(u2, kAlpha2, Complex(0.63, 0.41), TruncationParams{12});
    REQUIRE(e(0) < 1e-4);
    REQUIRE(e(1) < 1e-4);
    REQUIRE(e(2) > 0.5);
}

TEST_CASE("multiplicity: m = 2 for u2, m = 1 for u1, m = 2 at the complex angle") {
    const auto grid = k_grid(3);
    FourierPotential u2 = build_u2();
    auto m2 = multiplicity(u2, kAlpha2, grid, TruncationParams{12});
    REQUIRE(m2.m == 2);
    FourierPotential u1 = build_u1();
    auto m1 = multiplicity(u1, Complex(0.58566355838955, 0.0), grid, TruncationParams{12});
    REQUIRE(m1.m == 1);
    auto mc =
        multiplicity(u1, Complex(0.96284233, 0.98734101), grid, TruncationParams{12});
    REQUIRE(mc.m == 2);
}

TEST_CASE("gap report at the first u2 angle") {
    FourierPotential u2 = build_u2();
    auto rep = gap_report(u2, kAlpha2, k_grid(3), TruncationParams{12});
    REQUIRE(rep.m == 2);
    REQUIRE(rep.flat_max < 1e-4);
    REQUIRE(rep.gap_min > 1e3 * rep.flat_max);
}

TEST_CASE("band functions are 1-Lipschitz along paths") {
    FourierPotential u2 = build_u2();
    const auto ks = k_path({"Gamma", "K", "M"}, 6);
    Eigen::VectorXd prev;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        Eigen::VectorXd e = bands_at(u2, Complex(0.6), ks[i], TruncationParams{8}, 4);
        if (i > 0) {
            const double dk = std::abs(ks[i] - ks[i - 1]);
            for (int b = 0; b < 4; ++b)
                REQUIRE(std::abs(e(b) - prev(b)) <= dk * 1.0 + 1e-9);
        }
        prev = e;
    }
}

TEST_CASE("full BM bands: chiral reduction, near-flat bands, rotation symmetry") {
    FourierPotential u2 = build_u2();
    FourierPotential v = u2.antichiral_derivative();
    const Complex k{0.9, 0.35};
    const TruncationParams t{8};
    const double alpha = kAlpha2.real();

    Eigen::VectorXd e0 = full_bm_bands(u2, v, alpha, 0.0, k, t);
    Eigen::VectorXd sv = bands_at_dense(u2, alpha, k, t);
    const int half = static_cast<int>(e0.size()) / 2;
    for (int i = 0; i < 6; ++i)
        REQUIRE(e0(half + i) == Catch::Approx(sv(i)).margin(1e-10));

    Eigen::VectorXd eb = full_bm_bands(u2, v, alpha, 0.7 * alpha, k, t);
    // nearly flat but not exactly flat, and well separated from the rest
    REQUIRE(std::abs(eb(half)) > 1e-6);
    REQUIRE(std::abs(eb(half + 1)) < 0.08);
    REQUIRE(eb(half + 2) > 3.0 * std::abs(eb(half + 1)));

    Eigen::VectorXd ew = full_bm_bands(u2, v, alpha, 0.7 * alpha, lat::omega * k, t);
    REQUIRE((ew - eb).cwiseAbs().maxCoeff() < 1e-8);
}
