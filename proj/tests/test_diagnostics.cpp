#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <kendep/diagnostics.hpp>
#include <kendep/distributions.hpp>

#include "oracles.hpp"

using namespace kendep;
using Catch::Matchers::WithinAbs;

namespace {

double sup_gap(const KendallCurve& c, bool against_diagonal) {
    double worst = 0.0;
    for (std::size_t k = 0; k < c.grid.size(); ++k)
        worst = std::max(worst, std::abs(c.k_emp[k] - (against_diagonal ? c.grid[k] : c.k_pi[k])));
    return worst;
}

} // namespace

TEST_CASE("curve grid", "[diagnostics]") {
    const auto g = curve_grid(16);
    REQUIRE(g.size() == 16);
    CHECK(g.front() > 0.0);
    CHECK(g.back() == 1.0);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK_THROWS_AS(curve_grid(15), kendep::domain_error);
    CHECK(curve_grid(kDefaultCurveGrid).size() == 512);
}

TEST_CASE("curve shape invariants", "[diagnostics][property]") {
    std::mt19937_64 g(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Sample s = oracle::random_sample(20 + g() % 80, 2 + g() % 3, g, rep % 2 == 0);
        for (const auto& c : kendall_curves(orthant_pseudo_obs_all_rotations(s), 64)) {
            REQUIRE(c.k_emp.size() == c.grid.size());
            REQUIRE(c.k_pi.size() == c.grid.size());
            CHECK(std::is_sorted(c.k_emp.begin(), c.k_emp.end()));
            CHECK(c.k_emp.back() == 1.0);
            CHECK_THAT(c.k_pi.back(), WithinAbs(1.0, 1e-15));
        }
    }
}

TEST_CASE("curve for pattern s equals the identity curve of the flipped sample", "[diagnostics][property]") {
    std::mt19937_64 g(6);
    const Sample s = oracle::random_sample(60, 3, g, true);
    for (const auto& p : sign_patterns(3)) {
        const auto a = kendall_curve(s, p, 32);
        const auto b = kendall_curve(apply_pattern(s, p), SignPattern{0, 3}, 32);
        CHECK(a.k_emp == b.k_emp);
        CHECK(a.k_pi == b.k_pi);
    }
}

TEST_CASE("comonotone identity curve is the diagonal", "[diagnostics]") {
    const Sample s = sample_equicorrelated_normal(3, 1.0, 500, 2);
    const auto c = kendall_curve(s, SignPattern{0, 3});
    CHECK(sup_gap(c, true) <= 1.0 / 500.0 + 1e-12);
    const auto dec = classify_class_membership(s);
    CHECK(dec.in_X2);
    CHECK(dec.in_X1);
    CHECK(std::find(dec.c2_witnesses.begin(), dec.c2_witnesses.end(), 0u) != dec.c2_witnesses.end());
    CHECK(std::find(dec.c2_witnesses.begin(), dec.c2_witnesses.end(), 7u) != dec.c2_witnesses.end());
}

TEST_CASE("independent uniforms track the product law", "[diagnostics]") {
    const Sample s = sample_uniform(3, 5000, 9);
    const auto curves = kendall_curves(orthant_pseudo_obs_all_rotations(s));
    REQUIRE(curves.size() == 8);
    for (const auto& c : curves)
        CHECK(sup_gap(c, false) <= 0.05);
    const auto dec = classify_class_membership(s, 2.0 * dkw_band(s.n()));
    CHECK(dec.in_X1);
    CHECK(dec.c1_witnesses.size() == 8);
}

TEST_CASE("circle curves cross the product law", "[diagnostics]") {
    const auto dec = classify_class_membership(sample_circle(5000, 3), 0.0);
    CHECK_FALSE(dec.in_X1);
    CHECK_FALSE(dec.in_X2);
    CHECK(dec.c1_witnesses.empty());
}

TEST_CASE("class nesting and determinism", "[diagnostics][property]") {
    std::mt19937_64 g(17);
    for (int rep = 0; rep < 40; ++rep) {
        const Sample s = oracle::random_sample(30 + g() % 100, 2 + g() % 2, g, rep % 3 == 0);
        const double tol = 0.1 * (g() % 4);
        const auto a = classify_class_membership(s, tol, 64);
        CHECK((!a.in_X2 || a.in_X1));
        const auto b = classify_class_membership(s, tol, 64);
        CHECK(a.c1_witnesses == b.c1_witnesses);
        CHECK(a.c2_witnesses == b.c2_witnesses);
        CHECK(a.tolerance == tol);
    }
    CHECK_THROWS_AS(classify_class_membership(sample_uniform(2, 10, 1), -0.1), kendep::domain_error);
}

TEST_CASE("DKW band", "[diagnostics]") {
    CHECK_THAT(dkw_band(100), WithinAbs(std::sqrt(std::log(40.0) / 200.0), 1e-15));
    CHECK(dkw_band(1000) < dkw_band(100));
}
