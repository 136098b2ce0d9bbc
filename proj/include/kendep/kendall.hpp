#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "sample.hpp"

namespace kendep {

// Below this t the cdf is evaluated through the chi-square survival form.
inline constexpr double kSeriesCutoff = 1e-3;

inline double chisq_kendall_cdf(int d, double t) {
    if (t <= 0.0)
        return 0.0;
    if (t >= 1.0)
        return 1.0;
    // 1 - F_{chi2(2d)}(-2 ln t) = Q(d, -ln t)
    return boost::math::gamma_q(static_cast<double>(d), -std::log(t));
}

inline double series_kendall_cdf(int d, double t) {
    if (t <= 0.0)
        return 0.0;
    const double l = -std::log(t);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < d; ++k) {
        term *= l / k;
        sum += term;
    }
    return t * sum;
}

inline double chisq_kendall_pdf(int d, double t) {
    // density of exp(-chi2(2d)/2) = derivative of Q(d, -ln t) in t
    return boost::math::gamma_p_derivative(static_cast<double>(d), -std::log(t)) / t;
}

inline double series_kendall_pdf(int d, double t) {
    const double l = -std::log(t);
    double v = 1.0;
    for (int k = 1; k < d; ++k)
        v *= l / k;
    return v;
}

// Kendall law of the product of d independent uniforms.
struct ProductKendallLaw {
    int d = 2;

    explicit ProductKendallLaw(int dim) : d(dim) {
        if (dim < 1)
            throw domain_error("product Kendall law: dimension must be >= 1");
    }

    double cdf(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw domain_error("product Kendall cdf: t = " + std::to_string(t) + " outside [0,1]");
        if (t == 0.0)
            return 0.0;
        if (t < kSeriesCutoff)
            return chisq_kendall_cdf(d, t);
        if (t > 0.5) // complement keeps the cdf below 1 and monotone near t = 1
            return 1.0 - boost::math::gamma_p(static_cast<double>(d), -std::log(t));
        return series_kendall_cdf(d, t);
    }

    double pdf(double t) const {
        if (!(t > 0.0 && t < 1.0))
            throw domain_error("product Kendall pdf: t = " + std::to_string(t) + " outside (0,1)");
        return series_kendall_pdf(d, t);
    }
};

inline double product_kendall_cdf(const ProductKendallLaw& law, double t) { return law.cdf(t); }
inline double product_kendall_pdf(const ProductKendallLaw& law, double t) { return law.pdf(t); }

// I_{k,n}(t) = int_0^t s^k ln^n(1/s) ds
//            = t^{k+1} sum_{j=0}^{n} (n)_j / (k+1)^{j+1} ln^{n-j}(1/t)
inline double descending_factorial_integral(int k, int n, double t) {
    if (k < 0 || n < 0)
        throw domain_error("descending factorial integral: k and n must be >= 0");
    if (!(t >= 0.0 && t <= 1.0))
        throw domain_error("descending factorial integral: t outside [0,1]");
    if (t == 0.0)
        return 0.0;
    const double l = -std::log(t);
    const double kp = k + 1.0;
    double falling = 1.0, sum = 0.0;
    for (int j = 0; j <= n; ++j) {
        if (j > 0)
            falling *= (n - j + 1);
        sum += falling / std::pow(kp, j + 1) * std::pow(l, n - j);
    }
    return std::pow(t, kp) * sum;
}

enum class Convention { include_self, exclude_self };

// T values of a sample; counts[i] is the number of points dominated by point i.
struct PseudoObservations {
    std::vector<std::uint32_t> counts;
    std::size_t denom = 1;
    Convention convention = Convention::include_self;

    std::size_t size() const { return counts.size(); }
    double operator[](std::size_t i) const { return static_cast<double>(counts[i]) / denom; }

    std::vector<double> values() const {
        std::vector<double> v(counts.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = (*this)[i];
        return v;
    }
};

// Column ranks preserving <= exactly: equal values share the smallest rank.
inline std::vector<std::int32_t> column_ranks(const Sample& s, std::size_t m) {
    const std::size_t n = s.n();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s(a, m) < s(b, m); });
    std::vector<std::int32_t> r(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = idx[k];
        r[i] = (k > 0 && s(i, m) == s(idx[k - 1], m)) ? r[idx[k - 1]] : static_cast<std::int32_t>(k);
    }
    return r;
}

// Column-major integer ranks, the working form for all dominance loops.
struct RankTable {
    std::size_t n = 0, d = 0;
    std::vector<std::int32_t> r; // r[m*n + i]

    explicit RankTable(const Sample& s) : n(s.n()), d(s.d()), r(s.n() * s.d()) {
        for (std::size_t m = 0; m < d; ++m) {
            auto c = column_ranks(s, m);
            std::copy(c.begin(), c.end(), r.begin() + static_cast<std::ptrdiff_t>(m * n));
        }
    }

    const std::int32_t* col(std::size_t m) const { return r.data() + m * n; }
};

// counts[i] = #{j : X_j <= X_i componentwise}, self included.
inline std::vector<std::uint32_t> dominance_counts(const RankTable& rt) {
    const std::size_t n = rt.n, d = rt.d;
    std::vector<std::uint32_t> counts(n, 0);
    constexpr std::size_t B = 512;
    alignas(64) std::uint8_t ok[B];
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t c = 0;
        for (std::size_t j0 = 0; j0 < n; j0 += B) {
            const std::size_t len = std::min(B, n - j0);
            {
                const std::int32_t* x = rt.col(0) + j0;
                const std::int32_t xi = rt.col(0)[i];
                for (std::size_t j = 0; j < len; ++j)
                    ok[j] = x[j] <= xi;
            }
            for (std::size_t m = 1; m < d; ++m) {
                const std::int32_t* x = rt.col(m) + j0;
                const std::int32_t xi = rt.col(m)[i];
                for (std::size_t j = 0; j < len; ++j)
                    ok[j] &= x[j] <= xi;
            }
            std::uint32_t part = 0;
            for (std::size_t j = 0; j < len; ++j)
                part += ok[j];
            c += part;
        }
        counts[i] = c;
    }
    return counts;
}

inline PseudoObservations multivariate_ecdf_at_points(const Sample& sample) {
    sample.validate();
    PseudoObservations p;
    p.counts = dominance_counts(RankTable(sample));
    p.denom = sample.n();
    p.convention = Convention::include_self;
    return p;
}

inline PseudoObservations pseudo_obs_excluding_self(const Sample& sample) {
    PseudoObservations p = multivariate_ecdf_at_points(sample);
    for (auto& c : p.counts)
        c -= 1;
    p.denom = sample.n() - 1;
    p.convention = Convention::exclude_self;
    return p;
}

// Right-continuous step function t -> #{T_i <= t}/n.
class EmpiricalKendallCdf {
public:
    explicit EmpiricalKendallCdf(const PseudoObservations& p) : v_(p.values()) {
        std::sort(v_.begin(), v_.end());
    }
    explicit EmpiricalKendallCdf(std::vector<double> v) : v_(std::move(v)) {
        std::sort(v_.begin(), v_.end());
    }

    double operator()(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw domain_error("empirical Kendall cdf: t outside [0,1]");
        if (t == 1.0 || v_.empty())
            return 1.0;
        auto it = std::upper_bound(v_.begin(), v_.end(), t);
        return static_cast<double>(it - v_.begin()) / static_cast<double>(v_.size());
    }

private:
    std::vector<double> v_;
};

inline double empirical_kendall_cdf(const PseudoObservations& p, double t) {
    return EmpiricalKendallCdf(p)(t);
}

// 1 - mean K(T_i). Summed over sorted counts so the result does not depend on
// row order.
inline double auk_estimate(const PseudoObservations& p, const ProductKendallLaw& law) {
    if (p.counts.empty())
        throw shape_error("auk estimate: no pseudo-observations");
    std::vector<std::uint32_t> c = p.counts;
    std::sort(c.begin(), c.end());
    double sum = 0.0;
    std::size_t k = 0;
    while (k < c.size()) {
        std::size_t run = k;
        while (run < c.size() && c[run] == c[k])
            ++run;
        sum += static_cast<double>(run - k) * law.cdf(static_cast<double>(c[k]) / p.denom);
        k = run;
    }
    return 1.0 - sum / static_cast<double>(c.size());
}

// Tie-adjusted Kendall tau (tau-b).
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw shape_error("kendall tau: columns differ in length");
    const std::size_t n = x.size();
    if (n < 2)
        throw shape_error("kendall tau: need n >= 2");
    long long conc = 0, disc = 0, tx = 0, ty = 0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const int sx = (x[i] > x[j]) - (x[i] < x[j]);
            const int sy = (y[i] > y[j]) - (y[i] < y[j]);
            if (sx == 0 && sy == 0)
                continue;
            if (sx == 0)
                ++tx;
            else if (sy == 0)
                ++ty;
            else if (sx == sy)
                ++conc;
            else
                ++disc;
        }
    const double nx = static_cast<double>(conc + disc + ty); // pairs untied in x
    const double ny = static_cast<double>(conc + disc + tx); // pairs untied in y
    if (nx == 0.0 || ny == 0.0)
        throw statistic_error("kendall tau: zero-variance column");
    return static_cast<double>(conc - disc) / std::sqrt(nx * ny);
}

inline double kendall_tau_pairwise(const Sample& s) {
    if (s.d() != 2)
        throw shape_error("kendall tau: expected a 2-column sample");
    return kendall_tau(s.column(0), s.column(1));
}

} // namespace kendep
