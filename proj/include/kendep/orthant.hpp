#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kendall.hpp"
#include "sample.hpp"

namespace kendep {

inline constexpr int kMaxDim = 20;

// Bit m of index set <=> coordinate m negated. Pattern 0 is the original data.
struct SignPattern {
    std::uint32_t index = 0;
    int d = 2;

    int sign(int m) const { return (index >> m) & 1u ? -1 : 1; }

    std::vector<int> signs() const {
        std::vector<int> s(d);
        for (int m = 0; m < d; ++m)
            s[m] = sign(m);
        return s;
    }

    std::string str() const {
        std::string s;
        for (int m = 0; m < d; ++m)
            s += sign(m) > 0 ? '+' : '-';
        return s;
    }
};

inline void check_dim(std::size_t d) {
    if (d < 2 || d > static_cast<std::size_t>(kMaxDim))
        throw config_error("dimension " + std::to_string(d) + " outside [2, " +
                           std::to_string(kMaxDim) + "]");
}

inline std::vector<SignPattern> sign_patterns(int d) {
    check_dim(static_cast<std::size_t>(d));
    std::vector<SignPattern> out(std::size_t{1} << d);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = SignPattern{static_cast<std::uint32_t>(k), d};
    return out;
}

inline Sample apply_pattern(const Sample& s, const SignPattern& p) {
    Sample out = s;
    for (std::size_t i = 0; i < s.n(); ++i)
        for (int m = 0; m < p.d; ++m)
            if (p.sign(m) < 0)
                out(i, m) = -s(i, m);
    return out;
}

// Per-point dominance tallies for all 2^d rotations, one pass over pairs.
// tally[i * 2^d + s] = #{k : D_s X_k <= D_s X_i}.
struct OrthantCounts {
    std::size_t n = 0;
    int d = 2;
    std::vector<std::uint32_t> tally;

    std::size_t patterns() const { return std::size_t{1} << d; }

    PseudoObservations pseudo(std::uint32_t s) const {
        PseudoObservations p;
        p.counts.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            p.counts[i] = tally[i * patterns() + s];
        p.denom = n;
        p.convention = Convention::include_self;
        return p;
    }
};

inline OrthantCounts orthant_counts(const RankTable& rt) {
    check_dim(rt.d);
    const std::size_t n = rt.n;
    const int d = static_cast<int>(rt.d);
    const std::uint32_t full = (std::uint32_t{1} << d) - 1;
    OrthantCounts oc;
    oc.n = n;
    oc.d = d;
    oc.tally.assign(n << d, 0);
    constexpr std::size_t B = 512;
    alignas(64) std::uint32_t le[B];
    alignas(64) std::uint32_t ge[B];
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t* t = oc.tally.data() + (i << d);
        for (std::size_t k0 = 0; k0 < n; k0 += B) {
            const std::size_t len = std::min(B, n - k0);
            for (std::size_t k = 0; k < len; ++k)
                le[k] = ge[k] = 0;
            for (int m = 0; m < d; ++m) {
                const std::int32_t* x = rt.col(m) + k0;
                const std::int32_t xi = rt.col(m)[i];
                for (std::size_t k = 0; k < len; ++k) {
                    le[k] |= std::uint32_t(x[k] <= xi) << m;
                    ge[k] |= std::uint32_t(x[k] >= xi) << m;
                }
            }
            for (std::size_t k = 0; k < len; ++k) {
                // coordinates where X_k > X_i must be negated; tied ones may
                // go either way
                const std::uint32_t base = ~le[k] & full;
                const std::uint32_t eq = le[k] & ge[k];
                if (eq == 0) {
                    ++t[base];
                    continue;
                }
                std::uint32_t sub = eq;
                for (;;) {
                    ++t[base | sub];
                    if (sub == 0)
                        break;
                    sub = (sub - 1) & eq;
                }
            }
        }
    }
    return oc;
}

inline OrthantCounts orthant_pseudo_obs_all_rotations(const Sample& s) {
    s.validate();
    return orthant_counts(RankTable(s));
}

struct AukVector {
    int d = 2;
    std::vector<double> auk;
};

inline AukVector auk_vector(const OrthantCounts& oc) {
    const ProductKendallLaw law(oc.d);
    AukVector v;
    v.d = oc.d;
    v.auk.resize(oc.patterns());
    for (std::uint32_t s = 0; s < oc.patterns(); ++s)
        v.auk[s] = auk_estimate(oc.pseudo(s), law);
    return v;
}

inline AukVector auk_vector(const Sample& s) {
    return auk_vector(orthant_pseudo_obs_all_rotations(s));
}

inline double normalizing_constant(int d) {
    if (d < 2)
        throw domain_error("normalizing constant: d must be >= 2");
    const double v = std::ldexp(1.0, d - 2) - std::ldexp(1.0, 1 - d) + std::ldexp(1.0, 1 - 2 * d);
    return 1.0 / std::sqrt(v);
}

// c_d ||D - 1/2||. Squared deviations are summed in sorted order so that any
// permutation of D gives the same bits.
inline double index_I(const AukVector& v) {
    if (v.auk.size() != (std::size_t{1} << v.d))
        throw shape_error("index: AUK vector length is not 2^d");
    std::vector<double> sq(v.auk.size());
    for (std::size_t k = 0; k < sq.size(); ++k)
        sq[k] = (v.auk[k] - 0.5) * (v.auk[k] - 0.5);
    std::sort(sq.begin(), sq.end());
    double s = 0.0;
    for (double x : sq)
        s += x;
    return normalizing_constant(v.d) * std::sqrt(s);
}

inline double index_I(const Sample& s) { return index_I(auk_vector(s)); }

enum class Level { weak, mild, strong, very_strong };

inline const char* level_name(Level l) {
    switch (l) {
    case Level::weak: return "weak";
    case Level::mild: return "mild";
    case Level::strong: return "strong";
    case Level::very_strong: return "very strong";
    }
    return "?";
}

inline Level classify_level(double i_star) {
    if (!(i_star >= 0.0 && i_star <= 1.0))
        throw domain_error("classify level: I* outside [0,1]");
    if (i_star < 0.25)
        return Level::weak;
    if (i_star < 0.5)
        return Level::mild;
    if (i_star < 0.75)
        return Level::strong;
    return Level::very_strong;
}

struct DependenceReport {
    double I = 0.0;
    double I_star = 0.0;
    Level level = Level::weak;
    bool I_exceeds_one = false;
    AukVector auk_vector;
};

} // namespace kendep
