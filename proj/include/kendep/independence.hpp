#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "distributions.hpp"
#include "errors.hpp"
#include "kendall.hpp"
#include "orthant.hpp"
#include "parallel.hpp"

namespace kendep {

enum class SigmaSource { exact_d2, quadrature_d2, shipped_table, paper_table, monte_carlo };

inline const char* sigma_source_name(SigmaSource s) {
    switch (s) {
    case SigmaSource::exact_d2: return "exact_d2";
    case SigmaSource::quadrature_d2: return "quadrature_d2";
    case SigmaSource::shipped_table: return "shipped_table";
    case SigmaSource::paper_table: return "paper_table";
    case SigmaSource::monte_carlo: return "monte_carlo";
    }
    return "?";
}

struct SigmaPi {
    int d = 2;
    double value = 0.0;
    SigmaSource source = SigmaSource::exact_d2;
    std::size_t r = 0, n = 0;
    std::uint64_t seed = 0;
};

// Published Monte Carlo estimates for d = 2..10 (r = 10000, n = 50000).
inline constexpr double kPaperSigmaTable[] = {0.20988, 0.19383, 0.16254, 0.12511, 0.09407,
                                              0.06853, 0.04912, 0.03395, 0.02377};

// Our estimates from estimate_sigma_pi(d, r = 2000, n = 5000, seed = 20240601), d = 2..10.
inline constexpr double kShippedSigmaTable[] = {0.20752977119135596, 0.28952155618689596, 0.38586517216681399,
                                                 0.49006470129625335, 0.55248051846446167, 0.59133088309833048,
                                                 0.55608103196952163, 0.46205282956894939, 0.33478174363707797};
inline constexpr std::size_t kShippedSigmaR = 2000;
inline constexpr std::size_t kShippedSigmaN = 5000;
inline constexpr std::uint64_t kShippedSigmaSeed = 20240601;

inline SigmaPi sigma_pi_exact_d2() {
    return SigmaPi{2, std::sqrt(19.0 / 432.0), SigmaSource::exact_d2};
}

// Gamma_Pi(s,t) for d = 2 and s <= t.
inline double gamma_pi_d2(double s, double t) { return s * (t - 1.0 - std::log(t)); }

// 2 * int_{0<s<t<1} k(s) Gamma(s,t) k(t) ds dt with k(t) = -ln t; returns the
// variance.
inline double sigma2_pi_quadrature_d2(double eps = 1e-10) {
    using boost::math::quadrature::gauss_kronrod;
    double err_outer = 0.0;
    auto inner = [&](double t) {
        if (t <= eps)
            return 0.0;
        auto g = [&](double s) { return -std::log(s) * gamma_pi_d2(s, t); };
        double e = 0.0;
        return gauss_kronrod<double, 31>::integrate(g, eps, t, 12, 1e-10, &e);
    };
    auto outer = [&](double t) { return -std::log(t) * inner(t); };
    const double v = 2.0 * gauss_kronrod<double, 31>::integrate(outer, eps, 1.0, 12, 1e-10, &err_outer);
    if (!std::isfinite(v) || err_outer > 1e-8)
        throw numeric_error("sigma quadrature did not converge");
    return v;
}

inline SigmaPi sigma_pi_quadrature_d2() {
    return SigmaPi{2, std::sqrt(sigma2_pi_quadrature_d2()), SigmaSource::quadrature_d2};
}

// Unrotated AUK of an i.i.d. uniform sample, straight from ranks.
inline double null_auk(int d, std::size_t n, std::uint64_t seed) {
    const Sample u = sample_uniform(d, n, seed);
    PseudoObservations p;
    p.counts = dominance_counts(RankTable(u));
    p.denom = n;
    return auk_estimate(p, ProductKendallLaw(d));
}

inline double sample_sd(const std::vector<double>& a) {
    double mean = 0.0;
    for (double v : a)
        mean += v;
    mean /= static_cast<double>(a.size());
    double ss = 0.0;
    for (double v : a)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(a.size() - 1));
}

inline SigmaPi estimate_sigma_pi(int d, std::size_t r, std::size_t n, std::uint64_t seed) {
    check_dim(static_cast<std::size_t>(d));
    if (r < 2 || n < 2)
        throw domain_error("estimate sigma: need r >= 2 and n >= 2");
    std::vector<double> a(r);
    const double rn = std::sqrt(static_cast<double>(n));
    parallel_for(r, [&](std::size_t j) { a[j] = rn * (null_auk(d, n, derive_seed(seed, j)) - 0.5); });
    return SigmaPi{d, sample_sd(a), SigmaSource::monte_carlo, r, n, seed};
}

inline SigmaPi sigma_pi_paper_table(int d) {
    if (d < 2 || d > 10)
        throw config_error("no published sigma for d = " + std::to_string(d));
    return SigmaPi{d, kPaperSigmaTable[d - 2], SigmaSource::paper_table};
}

// Default sigma: exact for d = 2, shipped Monte Carlo constants for 3 <= d <= 10.
inline std::optional<SigmaPi> default_sigma_pi(int d) {
    if (d == 2)
        return sigma_pi_exact_d2();
    if (d >= 3 && d <= 10 && kShippedSigmaTable[d - 2] > 0.0)
        return SigmaPi{d, kShippedSigmaTable[d - 2], SigmaSource::shipped_table, kShippedSigmaR,
                       kShippedSigmaN, kShippedSigmaSeed};
    return std::nullopt;
}

inline double test_statistic(double auk_hat, std::size_t n, const SigmaPi& sigma) {
    if (n < 2)
        throw domain_error("test statistic: need n >= 2");
    if (!(sigma.value > 0.0))
        throw domain_error("test statistic: sigma must be > 0");
    return std::sqrt(static_cast<double>(n)) * (auk_hat - 0.5) / sigma.value;
}

// Sample quantile, linear interpolation between order statistics (R type 7).
inline double quantile_type7(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline const std::vector<double>& calibrated_levels() {
    static const std::vector<double> c{0.90, 0.95, 0.99};
    return c;
}

struct CalibrationTable {
    int d = 2;
    std::size_t n = 0, r = 0;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::vector<double> levels;      // 0.90, 0.95, 0.99
    std::vector<double> percentiles; // matching p_{d,n;level}

    double percentile(double level) const {
        for (std::size_t k = 0; k < levels.size(); ++k)
            if (std::abs(levels[k] - level) < 1e-12)
                return percentiles[k];
        throw config_error("calibration table has no entry for level " + std::to_string(level));
    }
};

inline std::vector<double> null_abs_z(int d, std::size_t n, std::size_t r, std::uint64_t seed,
                                      const SigmaPi& sigma) {
    std::vector<double> z(r);
    parallel_for(r, [&](std::size_t j) {
        z[j] = std::abs(test_statistic(null_auk(d, n, derive_seed(seed, j)), n, sigma));
    });
    return z;
}

inline CalibrationTable calibrate_percentiles(int d, std::size_t n, std::size_t r, std::uint64_t seed,
                                              const SigmaPi& sigma) {
    check_dim(static_cast<std::size_t>(d));
    if (n < 2 || r < 100)
        throw domain_error("calibrate percentiles: need n >= 2 and r >= 100");
    const auto z = null_abs_z(d, n, r, seed, sigma);
    CalibrationTable t;
    t.d = d;
    t.n = n;
    t.r = r;
    t.seed = seed;
    t.sigma = sigma.value;
    t.levels = calibrated_levels();
    for (double lv : t.levels)
        t.percentiles.push_back(quantile_type7(z, lv));
    return t;
}

inline bool uses_asymptotic_critical(int d, std::size_t n) {
    return n > std::max<std::size_t>(1000, 100 * static_cast<std::size_t>(d));
}

inline double normal_upper_quantile(double alpha_half) {
    return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha_half));
}

inline double two_sided_p_value(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

enum class CriticalSource { asymptotic, calibrated };

inline const char* critical_source_name(CriticalSource c) {
    return c == CriticalSource::asymptotic ? "asymptotic" : "calibrated";
}

struct TestPolicy {
    std::optional<SigmaPi> sigma;                 // overrides the default sigma
    std::optional<CalibrationTable> calibration;  // supplied percentiles for (d, n)
    bool allow_calibration = true;                // run Algorithm 4 when none supplied
    bool allow_sigma_estimation = true;           // run Algorithm 3 when no sigma is known
    std::size_t calibration_r = 10000;
    std::size_t sigma_r = 2000;
    std::size_t sigma_n = 5000;
    std::uint64_t seed = 1;
    bool force_asymptotic = false;
};

struct TestReport {
    std::size_t n = 0;
    int d = 2;
    double auk_hat = 0.0;
    double z_n = 0.0;
    SigmaPi sigma;
    double critical_value = 0.0;
    CriticalSource critical_source = CriticalSource::asymptotic;
    double alpha = 0.05;
    bool reject = false;
    double p_value_asymptotic = 1.0;
    std::optional<CalibrationTable> calibration; // the table used, if any
};

inline SigmaPi resolve_sigma(int d, const TestPolicy& policy) {
    if (policy.sigma)
        return *policy.sigma;
    if (auto s = default_sigma_pi(d))
        return *s;
    if (!policy.allow_sigma_estimation)
        throw config_error("no sigma available for d = " + std::to_string(d) + " and estimation disabled");
    return estimate_sigma_pi(d, policy.sigma_r, policy.sigma_n, derive_seed(policy.seed, 0x5157));
}

inline double unrotated_auk(const Sample& s) {
    return auk_estimate(multivariate_ecdf_at_points(s), ProductKendallLaw(static_cast<int>(s.d())));
}

inline TestReport run_independence_test(const Sample& sample, double alpha, const TestPolicy& policy = {}) {
    sample.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("independence test: alpha must lie in (0,1)");
    const int d = static_cast<int>(sample.d());
    check_dim(sample.d());
    TestReport rep;
    rep.n = sample.n();
    rep.d = d;
    rep.alpha = alpha;
    rep.sigma = resolve_sigma(d, policy);
    rep.auk_hat = unrotated_auk(sample);
    rep.z_n = test_statistic(rep.auk_hat, rep.n, rep.sigma);
    rep.p_value_asymptotic = two_sided_p_value(rep.z_n);
    if (policy.force_asymptotic || uses_asymptotic_critical(d, rep.n)) {
        rep.critical_source = CriticalSource::asymptotic;
        rep.critical_value = normal_upper_quantile(alpha / 2.0);
    } else {
        const double level = 1.0 - alpha;
        const auto& lv = calibrated_levels();
        if (std::none_of(lv.begin(), lv.end(), [&](double x) { return std::abs(x - level) < 1e-12; }))
            throw config_error("calibrated critical values exist only for alpha in {0.10, 0.05, 0.01}");
        CalibrationTable table;
        if (policy.calibration && policy.calibration->d == d && policy.calibration->n == rep.n &&
            policy.calibration->sigma == rep.sigma.value) {
            table = *policy.calibration;
        } else if (policy.allow_calibration) {
            table = calibrate_percentiles(d, rep.n, policy.calibration_r, derive_seed(policy.seed, rep.n), rep.sigma);
        } else {
            throw config_error("no calibration entry for d = " + std::to_string(d) + ", n = " +
                               std::to_string(rep.n) + " and calibration is disabled");
        }
        rep.critical_source = CriticalSource::calibrated;
        rep.critical_value = table.percentile(level);
        rep.calibration = table;
    }
    rep.reject = std::abs(rep.z_n) > rep.critical_value;
    return rep;
}

} // namespace kendep
