#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <kendep/distributions.hpp>
#include <kendep/kendall.hpp>

using namespace kendep;
using Catch::Matchers::WithinAbs;

namespace {

double ks_uniform(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        dmax = std::max({dmax, (i + 1) / n - v[i], v[i] - i / n});
    return dmax;
}

// majority of three seeds pass the 1% KS check on every listed margin
bool margins_uniform(const FamilySpec& f, const std::vector<std::size_t>& cols) {
    const std::size_t n = 5000;
    int ok = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const Sample s = sample_family(f, n, seed);
        bool all = true;
        for (auto m : cols)
            all = all && ks_uniform(s.column(m)) < 1.63 / std::sqrt(static_cast<double>(n));
        ok += all;
    }
    return ok >= 2;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double frank_tau(double theta) {
    // 1 - 4/theta (1 - D1(theta)), D1 the first Debye function
    const int m = 20000;
    const double h = theta / m;
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double t = k * h;
        const double f = t == 0.0 ? 1.0 : t / std::expm1(t);
        s += f * (k == 0 || k == m ? 1 : (k % 2 ? 4 : 2));
    }
    const double d1 = s * h / 3.0 / theta;
    return 1.0 - 4.0 / theta * (1.0 - d1);
}

double joe_tau(double theta) {
    double s = 0.0;
    for (int k = 1; k < 200000; ++k)
        s += 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1) + 2.0));
    return 1.0 - 4.0 * s;
}

double amh_tau(double a) {
    return 1.0 - 2.0 * (a + (1.0 - a) * (1.0 - a) * std::log1p(-a)) / (3.0 * a * a);
}

} // namespace

TEST_CASE("equicorrelated normal", "[distributions]") {
    CHECK_THROWS_AS(sample_equicorrelated_normal(3, -0.7, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_equicorrelated_normal(3, 1.01, 10, 1), kendep::domain_error);
    CHECK_NOTHROW(sample_equicorrelated_normal(3, -0.5, 10, 1));
    for (double rho : {0.0, 0.5}) {
        const Sample s = sample_equicorrelated_normal(3, rho, 10000, 4);
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = a + 1; b < 3; ++b)
                CHECK_THAT(correlation(s.column(a), s.column(b)), WithinAbs(rho, 0.03));
    }
    const Sample c = sample_equicorrelated_normal(4, 1.0, 100, 2);
    for (std::size_t i = 0; i < c.n(); ++i)
        for (std::size_t m = 1; m < 4; ++m)
            CHECK(c(i, m) == c(i, 0));
}

TEST_CASE("general normal", "[distributions]") {
    Eigen::MatrixXd bad = sigma3(0.9, 0.9, -0.9);
    CHECK_THROWS_AS(sample_general_normal(bad, 10, 1), kendep::domain_error);
    Eigen::MatrixXd scaled = Eigen::MatrixXd::Identity(2, 2) * 2.0;
    CHECK_THROWS_AS(sample_general_normal(scaled, 10, 1), kendep::domain_error);
    const Sample s = sample_general_normal(sigma3(0.7, 0.5, 0.0), 10000, 3);
    CHECK_THAT(correlation(s.column(0), s.column(1)), WithinAbs(0.7, 0.03));
    CHECK_THAT(correlation(s.column(0), s.column(2)), WithinAbs(0.5, 0.03));
    CHECK_THAT(correlation(s.column(1), s.column(2)), WithinAbs(0.0, 0.03));
    const Sample id = sample_general_normal(Eigen::MatrixXd::Identity(3, 3), 10000, 5);
    CHECK_THAT(correlation(id.column(0), id.column(1)), WithinAbs(0.0, 0.03));
}

TEST_CASE("samplers are deterministic per seed", "[distributions]") {
    for (const char* spec : {"clayton:theta=2", "frank:theta=4", "gumbel:theta=2", "joe:theta=2", "fgm:theta=1",
                             "fgmt:theta=0.5", "circle", "exp:l1=2,l2=3,l12=1.3", "morgenstern:a=0.5",
                             "plackett:s=2", "alihaq:a=0.5,p=0.5", "gumbelexp:e=0.9", "t5", "noise1", "noise2",
                             "normal:rho=0.3,d=4", "uniform:d=5"}) {
        const FamilySpec f = parse_family(spec);
        INFO(spec);
        CHECK(sample_family(f, 200, 42) == sample_family(f, 200, 42));
        CHECK_FALSE(sample_family(f, 200, 42) == sample_family(f, 200, 43));
        CHECK_NOTHROW(sample_family(f, 200, 42).validate());
    }
}

TEST_CASE("copula margins are uniform", "[distributions][property]") {
    for (const char* spec : {"clayton:theta=2", "clayton:theta=5", "frank:theta=4", "frank:theta=8", "gumbel:theta=2",
                             "gumbel:theta=4", "joe:theta=2", "joe:theta=5", "fgm:theta=1", "fgm:theta=0.5",
                             "fgmt:theta=1", "fgmt:theta=0.7", "uniform:d=3"}) {
        INFO(spec);
        CHECK(margins_uniform(parse_family(spec), {0, 1, 2}));
    }
    for (const char* spec : {"plackett:s=1.25", "plackett:s=2", "alihaq:a=0.1,p=0.5", "alihaq:a=0.9,p=0.5",
                             "frank:theta=-3,d=2"}) {
        INFO(spec);
        CHECK(margins_uniform(parse_family(spec), {0, 1}));
    }
    CHECK(margins_uniform(parse_family("morgenstern:a=0.5"), {0}));
}

TEST_CASE("Archimedean Kendall tau matches closed forms", "[distributions]") {
    const std::size_t n = 10000;
    auto tau = [&](Archimedean f, double th) {
        const Sample s = sample_archimedean(f, th, 2, n, 8);
        return kendall_tau_pairwise(s);
    };
    CHECK_THAT(tau(Archimedean::clayton, 2.0), WithinAbs(0.5, 0.03));
    CHECK_THAT(tau(Archimedean::clayton, 5.0), WithinAbs(5.0 / 7.0, 0.03));
    CHECK_THAT(tau(Archimedean::gumbel, 2.0), WithinAbs(0.5, 0.03));
    CHECK_THAT(tau(Archimedean::gumbel, 4.0), WithinAbs(0.75, 0.03));
    CHECK_THAT(tau(Archimedean::frank, 4.0), WithinAbs(frank_tau(4.0), 0.03));
    CHECK_THAT(tau(Archimedean::frank, -4.0), WithinAbs(frank_tau(-4.0), 0.03));
    CHECK_THAT(tau(Archimedean::joe, 2.0), WithinAbs(joe_tau(2.0), 0.03));
    CHECK_THAT(tau(Archimedean::joe, 5.0), WithinAbs(joe_tau(5.0), 0.03));
}

TEST_CASE("near-independent Clayton", "[distributions]") {
    const Sample s = sample_archimedean(Archimedean::clayton, 0.01, 3, 5000, 2);
    CHECK(std::abs(kendall_tau(s.column(0), s.column(1))) < 0.03);
}

TEST_CASE("Archimedean parameter checks", "[distributions]") {
    CHECK_THROWS_AS(sample_archimedean(Archimedean::clayton, 0.0, 3, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_archimedean(Archimedean::gumbel, 0.9, 3, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_archimedean(Archimedean::joe, 0.5, 3, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_archimedean(Archimedean::frank, 0.0, 3, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_archimedean(Archimedean::frank, -2.0, 3, 10, 1), kendep::domain_error);
}

TEST_CASE("F-G-M", "[distributions]") {
    CHECK_THROWS_AS(sample_fgm(FgmVariant::C, 1.5, 10, 1), kendep::domain_error);
    // theta = 0 leaves the raw uniforms untouched
    const Sample a = sample_fgm(FgmVariant::C, 0.0, 100, 3);
    const Sample b = sample_uniform(3, 100, 3);
    CHECK(a == b);
    for (double a2 : {-0.99, -0.3, 0.3, 0.99})
        for (double u : {1e-9, 0.2, 0.5, 0.9, 1 - 1e-9}) {
            const double x = fgm_conditional_inverse(a2, u);
            CHECK_THAT(a2 * x * x + (1 - a2) * x, WithinAbs(u, 1e-12));
        }
}

TEST_CASE("bivariate families", "[distributions]") {
    const Sample c = sample_circle(100, 1);
    for (std::size_t i = 0; i < c.n(); ++i)
        CHECK_THAT(c(i, 0) * c(i, 0) + c(i, 1) * c(i, 1), WithinAbs(1.0, 1e-12));
    CHECK_NOTHROW(sample_bivariate_exp(2, 3, 1.3, 10, 1));
    CHECK_THROWS_AS(sample_bivariate_exp(2, 3, 2.5, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_plackett(1.0, 10, 1), kendep::domain_error);
    CHECK_THROWS_AS(sample_alihaq(1.2, 0.5, 10, 1), kendep::domain_error);
    CHECK_THAT(kendall_tau_pairwise(sample_alihaq(0.9, 0.5, 10000, 4)), WithinAbs(amh_tau(0.9), 0.03));
    CHECK_THAT(kendall_tau_pairwise(sample_alihaq(0.1, 0.5, 10000, 4)), WithinAbs(amh_tau(0.1), 0.03));
    // t5 keeps the stated correlation 1/2 of Sigma = [[1,1],[1,4]]
    const Sample t = sample_t5(20000, 6);
    CHECK_THAT(kendall_tau_pairwise(t), WithinAbs(2.0 / std::numbers::pi * std::asin(0.5), 0.03));
}

TEST_CASE("family specs", "[distributions]") {
    const FamilySpec f = parse_family("Clayton:theta=2,d=4");
    CHECK(f.name == "clayton");
    CHECK(f.get("theta") == 2.0);
    CHECK(spec_dim(f, 3) == 4);
    CHECK(sample_family(f, 10, 1).d() == 4);
    CHECK(sample_family(parse_family("normal:r12=0.2,r13=-0.8,r23=0"), 10, 1).d() == 3);
    CHECK_THROWS_AS(parse_family("clayton:theta=abc"), config_error);
    CHECK_THROWS_AS(sample_family(parse_family("spiral"), 10, 1), config_error);
    CHECK_THROWS_AS(sample_family(parse_family("clayton"), 10, 1), config_error);
    CHECK_THROWS_AS(sample_family(parse_family("normal:rho=-0.7,d=3"), 10, 1), kendep::domain_error);
}
