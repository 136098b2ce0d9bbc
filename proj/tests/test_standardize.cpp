#include <catch_amalgamated.hpp>

#include <random>

#include <kendep/standardize.hpp>

using namespace kendep;
using Catch::Matchers::WithinAbs;

namespace {

double max_gap(const StandardizerPhi& a, const StandardizerPhi& b) {
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double t = k / 1000.0;
        worst = std::max(worst, std::abs(a(t) - b(t)));
    }
    return worst;
}

} // namespace

TEST_CASE("built-in standardizers", "[standardize]") {
    const auto p2 = phi_builtin(2), p3 = phi_builtin(3);
    CHECK(p2(0.0) == 0.0);
    CHECK_THAT(p2(1.0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(p3(1.0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(p2(0.5), WithinAbs(2.070 * .5 + 0.061 * .25 - 2.471 * .125 + 1.307 * .0625 + 0.033 * .03125, 1e-14));
    CHECK(p2.satisfies_invariants());
    CHECK(p3.satisfies_invariants());
    CHECK(p2.provenance.builtin);
    CHECK_THROWS_AS(phi_builtin(4), config_error);
}

TEST_CASE("I* evaluation", "[standardize]") {
    const auto p3 = phi_builtin(3);
    CHECK(index_I_star(0.0, p3) == 0.0);
    CHECK_THAT(index_I_star(1.0, p3), WithinAbs(1.0, 1e-12));
    CHECK_THAT(index_I_star(0.243, p3), WithinAbs(0.5, 0.01));
    CHECK_THAT(index_I_star(1.3, p3), WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(index_I_star(-0.1, p3), kendep::domain_error);
}

TEST_CASE("I* is nondecreasing in I", "[standardize][property]") {
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(0.0, 1.2);
    for (const auto& phi : {phi_builtin(2), phi_builtin(3)})
        for (int k = 0; k < 10000; ++k) {
            double a = u(g), b = u(g);
            if (a > b)
                std::swap(a, b);
            CHECK(index_I_star(a, phi) <= index_I_star(b, phi));
        }
}

TEST_CASE("monotone fit reproduces the identity", "[standardize]") {
    const std::vector<double> x{0, 0.2, 0.4, 0.6, 0.8, 1};
    const auto phi = fit_monotone_polynomial(x, x);
    for (int k = 0; k < kPhiGrid; ++k) {
        const double t = static_cast<double>(k) / (kPhiGrid - 1);
        CHECK_THAT(phi(t), WithinAbs(t, 1e-6));
    }
}

TEST_CASE("monotone fit to the published I(rho) pairs is close to phi_3", "[standardize]") {
    const std::vector<double> I{0, .194, .423, .609, .758, 1}, rho{0, .4, .8, .95, .99, 1};
    const auto phi = fit_monotone_polynomial(I, rho);
    CHECK(phi.satisfies_invariants());
    CHECK(max_gap(phi, phi_builtin(3)) <= 0.05);
}

TEST_CASE("monotone fit of non-monotone data stays monotone", "[standardize]") {
    const std::vector<double> x{0, 0.2, 0.4, 0.6, 0.8, 1}, y{0, 0.6, 0.3, 0.7, 0.2, 1};
    const auto phi = fit_monotone_polynomial(x, y);
    for (int k = 0; k < kPhiGrid; ++k)
        CHECK(phi.derivative(static_cast<double>(k) / (kPhiGrid - 1)) >= 0.0);
    CHECK(phi.satisfies_invariants());
}

TEST_CASE("monotone fit input validation", "[standardize]") {
    CHECK_THROWS_AS(fit_monotone_polynomial({0, 0.5, 1}, {0, 0.5, 1}), fit_error);
    CHECK_THROWS_AS(fit_monotone_polynomial({0, 0.5, 0.4, 1}, {0, 0.5, 0.6, 1}), fit_error);
    CHECK_THROWS_AS(fit_monotone_polynomial({0.1, 0.3, 0.5, 1}, {0, 0.5, 0.6, 1}), fit_error);
    CHECK_THROWS_AS(fit_monotone_polynomial({0, 0.3, 0.5, 1}, {0.5, 0.5, 0.5, 0.5}), fit_error);
}

TEST_CASE("Monte Carlo index for equicorrelated normals", "[standardize]") {
    CHECK_THROWS_AS(mc_index_for_equicorrelated_normal(3, -0.7, 100, 2, 1), kendep::domain_error);
    CHECK_THROWS_AS(mc_index_for_equicorrelated_normal(3, 1.2, 100, 2, 1), kendep::domain_error);
    CHECK_NOTHROW(mc_index_for_equicorrelated_normal(3, -0.5, 100, 2, 1));
    const double a = mc_index_for_equicorrelated_normal(3, 0.5, 500, 4, 9);
    CHECK(a == mc_index_for_equicorrelated_normal(3, 0.5, 500, 4, 9));
    CHECK_THAT(mc_index_for_equicorrelated_normal(3, 1.0, 500, 2, 1), WithinAbs(0.912, 0.03));
}

TEST_CASE("Monte Carlo I(rho) at desk scale", "[standardize][slow]") {
    CHECK_THAT(mc_index_for_equicorrelated_normal(3, 0.0, 5000, 5, 1), WithinAbs(0.02, 0.015));
    CHECK_THAT(mc_index_for_equicorrelated_normal(3, 0.5, 2000, 25, 2), WithinAbs(0.243, 0.015));
    CHECK_THAT(mc_index_for_equicorrelated_normal(3, 0.9, 2000, 25, 3), WithinAbs(0.524, 0.02));
}

TEST_CASE("calibration is reproducible and valid", "[standardize]") {
    const auto a = calibrate_phi(4, 300, 3, 7);
    const auto b = calibrate_phi(4, 300, 3, 7);
    CHECK(a.coef == b.coef);
    CHECK(a.satisfies_invariants());
    CHECK_FALSE(a.provenance.builtin);
    CHECK(a.provenance.seed == 7);
    CHECK(a.provenance.grid.rho == calibration_rhos());
    CHECK(a.provenance.grid.I_of_rho.front() == 0.0);
    CHECK(a.provenance.grid.I_of_rho.back() == 1.0);
}

TEST_CASE("calibrated phi_2 and phi_3 track the built-ins", "[standardize][slow]") {
    for (int d : {2, 3}) {
        const auto phi = calibrate_phi(d, kPhiDefaultN, kPhiDefaultReps, 11);
        INFO("d = " << d);
        CHECK(phi.satisfies_invariants());
        CHECK(max_gap(phi, phi_builtin(d)) <= 0.05);
    }
}
