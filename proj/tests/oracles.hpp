#pragma once

// Slow reference implementations used only by the tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <kendep/sample.hpp>

namespace oracle {

// Random sample; with ties, values are drawn from a small integer set.
inline kendep::Sample random_sample(std::size_t n, std::size_t d, std::mt19937_64& g, bool ties) {
    kendep::Sample s(n, d);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> small(0, 4);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 0; m < d; ++m)
            s(i, m) = ties ? small(g) : z(g);
    return s;
}

// Strictly increasing, coordinate-specific maps.
inline kendep::Sample monotone_transform(const kendep::Sample& s, std::mt19937_64& g) {
    kendep::Sample t = s;
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (std::size_t m = 0; m < s.d(); ++m) {
        const double a = u(g), b = u(g) - 1.0;
        const int kind = static_cast<int>(m % 3);
        for (std::size_t i = 0; i < s.n(); ++i) {
            const double x = s(i, m);
            t(i, m) = kind == 0 ? a * x + b : kind == 1 ? std::exp(a * x) : std::atan(x) + x * x * x;
        }
    }
    return t;
}

inline std::vector<double> naive_ecdf(const kendep::Sample& s, const std::vector<int>& signs = {}) {
    const std::size_t n = s.n(), d = s.d();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < n; ++j) {
            bool le = true;
            for (std::size_t m = 0; m < d && le; ++m) {
                const double sg = signs.empty() ? 1.0 : signs[m];
                le = sg * s(j, m) <= sg * s(i, m);
            }
            c += le;
        }
        out[i] = static_cast<double>(c) / static_cast<double>(n);
    }
    return out;
}

inline double tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double a = (x[i] > x[j]) - (x[i] < x[j]);
            const double b = (y[i] > y[j]) - (y[i] < y[j]);
            s += a * b;
            vx += a * a;
            vy += b * b;
        }
    return s / std::sqrt(vx * vy);
}

// int_0^t s^k ln^n(1/s) ds by composite Simpson after s = t e^{-u}.
inline double integral_sk_logn(int k, int n, double t) {
    const double U = 60.0;
    const int m = 200000;
    const double h = U / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double u = i * h;
        const double s = t * std::exp(-u);
        const double f = std::pow(s, k) * std::pow(-std::log(s), n) * s;
        acc += f * (i == 0 || i == m ? 1 : (i % 2 ? 4 : 2));
    }
    return acc * h / 3.0;
}

} // namespace oracle
