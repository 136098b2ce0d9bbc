#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "kendall.hpp"
#include "orthant.hpp"

namespace kendep {

inline constexpr std::size_t kDefaultCurveGrid = 512;

struct KendallCurve {
    SignPattern pattern;
    std::vector<double> grid;
    std::vector<double> k_emp;
    std::vector<double> k_pi;
};

// Equispaced grid k/size, k = 1..size (t = 0 excluded).
inline std::vector<double> curve_grid(std::size_t size) {
    if (size < 16)
        throw domain_error("kendall curve: grid size must be >= 16");
    std::vector<double> g(size);
    for (std::size_t k = 1; k <= size; ++k)
        g[k - 1] = static_cast<double>(k) / static_cast<double>(size);
    return g;
}

inline KendallCurve kendall_curve(const OrthantCounts& oc, std::uint32_t pattern,
                                  std::size_t grid_size = kDefaultCurveGrid) {
    KendallCurve c;
    c.pattern = SignPattern{pattern, oc.d};
    c.grid = curve_grid(grid_size);
    const EmpiricalKendallCdf emp(oc.pseudo(pattern));
    const ProductKendallLaw law(oc.d);
    c.k_emp.reserve(grid_size);
    c.k_pi.reserve(grid_size);
    for (double t : c.grid) {
        c.k_emp.push_back(emp(t));
        c.k_pi.push_back(law.cdf(t));
    }
    return c;
}

inline KendallCurve kendall_curve(const Sample& s, const SignPattern& p,
                                  std::size_t grid_size = kDefaultCurveGrid) {
    return kendall_curve(orthant_pseudo_obs_all_rotations(s), p.index, grid_size);
}

inline std::vector<KendallCurve> kendall_curves(const OrthantCounts& oc,
                                                std::size_t grid_size = kDefaultCurveGrid) {
    std::vector<KendallCurve> out;
    for (std::uint32_t s = 0; s < oc.patterns(); ++s)
        out.push_back(kendall_curve(oc, s, grid_size));
    return out;
}

struct ClassDecision {
    bool in_X1 = false;
    bool in_X2 = false;
    std::vector<std::uint32_t> c1_witnesses; // difference of constant sign
    std::vector<std::uint32_t> c2_witnesses; // difference <= tolerance throughout
    double tolerance = 0.0;
};

// Half-width of the 95% Dvoretzky-Kiefer-Wolfowitz band.
inline double dkw_band(std::size_t n, double level = 0.95) {
    return std::sqrt(std::log(2.0 / (1.0 - level)) / (2.0 * static_cast<double>(n)));
}

inline ClassDecision classify_class_membership(const std::vector<KendallCurve>& curves, double tolerance) {
    if (!(tolerance >= 0.0))
        throw domain_error("class check: tolerance must be >= 0");
    ClassDecision dec;
    dec.tolerance = tolerance;
    for (const auto& c : curves) {
        bool below = true, above = true;
        for (std::size_t k = 0; k < c.grid.size(); ++k) {
            const double diff = c.k_emp[k] - c.k_pi[k];
            if (diff > tolerance)
                below = false;
            if (diff < -tolerance)
                above = false;
        }
        if (below || above)
            dec.c1_witnesses.push_back(c.pattern.index);
        if (below)
            dec.c2_witnesses.push_back(c.pattern.index);
    }
    dec.in_X2 = dec.c2_witnesses.size() >= 2;
    dec.in_X1 = !dec.c1_witnesses.empty();
    return dec;
}

inline ClassDecision classify_class_membership(const Sample& s, double tolerance,
                                               std::size_t grid_size = kDefaultCurveGrid) {
    return classify_class_membership(kendall_curves(orthant_pseudo_obs_all_rotations(s), grid_size), tolerance);
}

inline ClassDecision classify_class_membership(const Sample& s) {
    return classify_class_membership(s, dkw_band(s.n()));
}

} // namespace kendep
