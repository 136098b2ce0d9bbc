#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"
#include "sample.hpp"

namespace kendep {

inline Eigen::MatrixXd sigma_equicorrelated(int d, double rho) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(d, d, rho);
    s.diagonal().setOnes();
    return s;
}

inline void check_equicorrelated(int d, double rho) {
    if (d < 2)
        throw domain_error("equicorrelated normal: d must be >= 2");
    const double lo = 1.0 / (1.0 - d);
    if (!(rho >= lo - 1e-12 && rho <= 1.0))
        throw domain_error("equicorrelated normal: Sigma_d(rho) is positive semidefinite only for " +
                           std::to_string(lo) + " <= rho <= 1 (Remark 1); got rho = " +
                           std::to_string(rho) + " for d = " + std::to_string(d));
}

// Returns A with A A^T = sigma. Cholesky when positive definite, otherwise the
// symmetric eigen factorization.
inline Eigen::MatrixXd normal_factor(const Eigen::MatrixXd& sigma) {
    const Eigen::Index d = sigma.rows();
    if (sigma.cols() != d)
        throw domain_error("normal: covariance matrix is not square");
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
        throw domain_error("normal: covariance matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-10)
        throw domain_error("normal: covariance matrix is not positive semidefinite (min eigenvalue " +
                           std::to_string(lmin) + ")");
    if (lmin > 1e-10) {
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() == Eigen::Success)
            return llt.matrixL();
    }
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

inline Sample sample_general_normal(const Eigen::MatrixXd& sigma, std::size_t n, std::uint64_t seed) {
    for (Eigen::Index m = 0; m < sigma.rows(); ++m)
        if (std::abs(sigma(m, m) - 1.0) > 1e-12)
            throw domain_error("normal: expected unit diagonal");
    const Eigen::MatrixXd a = normal_factor(sigma);
    const std::size_t d = static_cast<std::size_t>(sigma.rows());
    Engine g = make_engine(seed);
    Sample s(n, d);
    Eigen::VectorXd z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < d; ++m)
            z[m] = standard_normal(g);
        Eigen::VectorXd x = a * z;
        for (std::size_t m = 0; m < d; ++m)
            s(i, m) = x[m];
    }
    return s;
}

inline Eigen::MatrixXd sigma3(double r12, double r13, double r23) {
    Eigen::MatrixXd s(3, 3);
    s << 1, r12, r13, r12, 1, r23, r13, r23, 1;
    return s;
}

inline Sample sample_equicorrelated_normal(int d, double rho, std::size_t n, std::uint64_t seed) {
    check_equicorrelated(d, rho);
    if (rho == 1.0) {
        Engine g = make_engine(seed);
        Sample s(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            const double z = standard_normal(g);
            for (int m = 0; m < d; ++m)
                s(i, m) = z;
        }
        return s;
    }
    return sample_general_normal(sigma_equicorrelated(d, rho), n, seed);
}

inline Sample sample_uniform(int d, std::size_t n, std::uint64_t seed) {
    Engine g = make_engine(seed);
    Sample s(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (int m = 0; m < d; ++m)
            s(i, m) = uniform_open(g);
    return s;
}

// ---- Archimedean copulas via frailty ----------------------------------------

enum class Archimedean { clayton, frank, gumbel, joe };

inline const char* family_name(Archimedean f) {
    switch (f) {
    case Archimedean::clayton: return "clayton";
    case Archimedean::frank: return "frank";
    case Archimedean::gumbel: return "gumbel";
    case Archimedean::joe: return "joe";
    }
    return "?";
}

// Positive stable law with Laplace transform exp(-s^alpha), 0 < alpha <= 1.
inline double positive_stable(double alpha, Engine& g) {
    if (alpha == 1.0)
        return 1.0;
    const double th = std::numbers::pi * uniform_open(g);
    const double w = standard_exponential(g);
    return std::sin(alpha * th) / std::pow(std::sin(th), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha);
}

// Logarithmic series law with parameter p in (0,1) (Kemp's LK method).
inline double logarithmic_series(double theta, Engine& g) {
    const double h = -theta;                // ln(1 - p)
    const double p = -std::expm1(-theta);   // 1 - e^{-theta}
    const double u2 = uniform_open(g);
    if (u2 > p)
        return 1.0;
    const double q = -std::expm1(uniform_open(g) * h);
    if (u2 < q * q)
        return std::floor(1.0 + std::log(u2) / std::log(q));
    return u2 > q ? 1.0 : 2.0;
}

// Sibuya law, P(V > k) = Gamma(k+1-a) / (Gamma(1-a) Gamma(k+1)), by inversion.
inline double sibuya(double a, Engine& g) {
    const double u = uniform_open(g);
    if (u <= a)
        return 1.0;
    const double w = 1.0 - u;
    const double lg1a = std::lgamma(1.0 - a);
    auto log_surv = [&](double k) {
        // lgamma differences lose precision for huge k; use the ratio asymptotics
        if (k > 1e6)
            return -a * std::log(k + 0.5 * (1.0 - a)) - lg1a;
        return std::lgamma(k + 1.0 - a) - lg1a - std::lgamma(k + 1.0);
    };
    const double lw = std::log(w);
    double hi = 2.0;
    while (log_surv(hi) > lw) {
        hi *= 2.0;
        if (hi > 0x1.0p62)
            return hi;
    }
    double lo = hi / 2.0; // S(lo) > w unless lo == 1
    if (lo < 1.0)
        lo = 1.0;
    while (hi - lo > 1.0) {
        const double mid = std::floor((lo + hi) / 2.0);
        if (mid <= lo || mid >= hi) // beyond 2^53 neighbours are more than 1 apart
            break;
        if (log_surv(mid) > lw)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

inline void check_archimedean(Archimedean f, double theta, int d) {
    if (d < 2)
        throw domain_error("archimedean: d must be >= 2");
    switch (f) {
    case Archimedean::clayton:
        if (!(theta > 0.0))
            throw domain_error("clayton: theta must be > 0");
        break;
    case Archimedean::gumbel:
        if (!(theta >= 1.0))
            throw domain_error("gumbel: theta must be >= 1");
        break;
    case Archimedean::joe:
        if (!(theta >= 1.0))
            throw domain_error("joe: theta must be >= 1");
        break;
    case Archimedean::frank:
        if (theta == 0.0 || !std::isfinite(theta))
            throw domain_error("frank: theta must be nonzero");
        if (theta < 0.0 && d > 2)
            throw domain_error("frank: negative theta is only a copula for d = 2");
        break;
    }
}

inline Sample sample_archimedean(Archimedean f, double theta, int d, std::size_t n, std::uint64_t seed) {
    check_archimedean(f, theta, d);
    Engine g = make_engine(seed);
    Sample s(n, d);
    if (f == Archimedean::frank && theta < 0.0) {
        // bivariate conditional inversion
        for (std::size_t i = 0; i < n; ++i) {
            const double u = uniform_open(g), w = uniform_open(g);
            const double v = -std::log1p(w * std::expm1(-theta) /
                                         (w + (1.0 - w) * std::exp(-theta * u))) / theta;
            s(i, 0) = u;
            s(i, 1) = v;
        }
        return s;
    }
    std::gamma_distribution<double> gam(1.0 / theta, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 1.0;
        switch (f) {
        case Archimedean::clayton: v = gam(g); break;
        case Archimedean::gumbel: v = positive_stable(1.0 / theta, g); break;
        case Archimedean::frank: v = logarithmic_series(theta, g); break;
        case Archimedean::joe: v = sibuya(1.0 / theta, g); break;
        }
        for (int m = 0; m < d; ++m) {
            const double x = standard_exponential(g) / v;
            double u = 0.0;
            switch (f) {
            case Archimedean::clayton: u = std::pow(1.0 + x, -1.0 / theta); break;
            case Archimedean::gumbel: u = std::exp(-std::pow(x, 1.0 / theta)); break;
            case Archimedean::frank: u = -std::log1p(std::exp(-x) * std::expm1(-theta)) / theta; break;
            case Archimedean::joe: u = 1.0 - std::pow(-std::expm1(-x), 1.0 / theta); break;
            }
            s(i, m) = u;
        }
    }
    return s;
}

// ---- trivariate F-G-M ---------------------------------------------------------

enum class FgmVariant { C, Ctilde };

// Inverse of u -> a u^2 + (1-a) u on [0,1]. Both quadratic roots are formed and
// the one inside [0,1] is kept; the kept root is evaluated in rationalized form.
inline double fgm_conditional_inverse(double a, double u) {
    if (a == 0.0)
        return u;
    const double disc = std::sqrt((1.0 - a) * (1.0 - a) + 4.0 * a * u);
    const double r1 = (a - 1.0 - disc) / (2.0 * a);
    const double r2 = (a - 1.0 + disc) / (2.0 * a);
    const bool in1 = r1 >= 0.0 && r1 <= 1.0;
    const bool in2 = r2 >= 0.0 && r2 <= 1.0;
    if (in1 == in2)
        throw numeric_error("fgm: expected exactly one root in [0,1]");
    if (in1)
        return r1;
    return 2.0 * u / (disc + 1.0 - a);
}

inline Sample sample_fgm(FgmVariant v, double theta, std::size_t n, std::uint64_t seed) {
    if (!(std::abs(theta) <= 1.0))
        throw domain_error("fgm: |theta| must be <= 1");
    Engine g = make_engine(seed);
    Sample s(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = uniform_open(g), x2 = uniform_open(g), x3 = uniform_open(g);
        const double a = v == FgmVariant::C ? theta * (2.0 * x2 - 1.0)
                                            : -theta * (2.0 * x2 - 1.0) * (2.0 * x3 - 1.0);
        s(i, 0) = fgm_conditional_inverse(a, x1);
        s(i, 1) = x2;
        s(i, 2) = x3;
    }
    return s;
}

// ---- bivariate families ---------------------------------------------------------

inline Sample sample_circle(std::size_t n, std::uint64_t seed) {
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = standard_normal(g), z2 = standard_normal(g);
        const double r = std::hypot(z1, z2);
        s(i, 0) = z1 / r;
        s(i, 1) = z2 / r;
    }
    return s;
}

inline Sample sample_bivariate_exp(double l1, double l2, double l12, std::size_t n, std::uint64_t seed) {
    if (!(l1 > 0 && l2 > 0 && l12 > 0))
        throw domain_error("exp: rates must be positive");
    if (!(l12 < std::min(l1, l2)))
        throw domain_error("exp: need lambda12 < min(lambda1, lambda2)");
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double e1 = standard_exponential(g) / (l1 - l12);
        const double e2 = standard_exponential(g) / (l2 - l12);
        const double e3 = standard_exponential(g) / l12;
        s(i, 0) = std::min(e1, e3) - 1.0 / l1;
        s(i, 1) = std::min(e2, e3) - 1.0 / l2;
    }
    return s;
}

inline Sample sample_morgenstern(double alpha, std::size_t n, std::uint64_t seed) {
    if (!(alpha > 0.0))
        throw domain_error("morgenstern: alpha must be > 0");
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = uniform_open(g), u = uniform_open(g);
        const double b = 2.0 * x - 1.0;
        const double z = alpha * b - 1.0;
        const double w = 1.0 - 2.0 * alpha * b + alpha * alpha * b * b + 4.0 * alpha * u * b;
        s(i, 0) = x;
        s(i, 1) = 2.0 * u / (std::sqrt(w) - z);
    }
    return s;
}

// The quotient by W2 makes the second margin uniform.
inline Sample sample_plackett(double sp, std::size_t n, std::uint64_t seed) {
    if (!(sp > 1.0))
        throw domain_error("plackett: s must be > 1");
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = uniform_open(g), u = uniform_open(g);
        const double w1 = u * (1.0 - u);
        const double w2 = sp + w1 * (sp - 1.0) * (sp - 1.0);
        const double w3 = 2.0 * w1 * (sp * sp * x + 1.0 - x) + sp * (1.0 - 2.0 * w1);
        const double w4 = sp * (sp + 4.0 * (1.0 - sp) * (1.0 - sp) * x * (1.0 - x) * w1);
        s(i, 0) = x;
        s(i, 1) = (w3 - (1.0 - 2.0 * u) * std::sqrt(w4)) / (2.0 * w2);
    }
    return s;
}

// Conditional inversion of C(x,y) = xy / (1 - a(1-x)(1-y)) given X = x.
// p is validated and recorded but does not enter the construction.
inline Sample sample_alihaq(double a, double p, std::size_t n, std::uint64_t seed) {
    if (!(a > 0.0 && a < 1.0))
        throw domain_error("alihaq: a must lie in (0,1)");
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("alihaq: p must lie in (0,1)");
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = uniform_open(g), u = uniform_open(g);
        const double v = 1.0 - x;
        const double w1 = -a * (2.0 * v * u + 1.0) + 2.0 * a * a * v * v * u + 1.0;
        const double w2 = a * a * (4.0 * v * v * u - 4.0 * v * u + 1.0) - a * (4.0 * v * u - 4.0 * u + 2.0) + 1.0;
        s(i, 0) = x;
        s(i, 1) = 2.0 * u * (a * v - 1.0) * (a * v - 1.0) / (w1 + std::sqrt(w2));
    }
    return s;
}

inline Sample sample_gumbel_exp(double e, std::size_t n, std::uint64_t seed) {
    if (!(e > 0.0))
        throw domain_error("gumbel bivariate exponential: e must be > 0");
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -std::log(uniform_open(g));
        const double w1 = 1.0 + e * x;
        const double w2 = (w1 - e) / w1;
        const double w3 = -std::log(uniform_open(g));
        const double u3 = uniform_open(g);
        const double u4 = uniform_open(g);
        s(i, 0) = x;
        s(i, 1) = u3 < w2 ? w1 * w3 : w1 * (w3 - std::log(u4));
    }
    return s;
}

// Bivariate t with 5 degrees of freedom and scale matrix [[1,1],[1,4]].
inline Sample sample_t5(std::size_t n, std::uint64_t seed) {
    Engine g = make_engine(seed);
    std::chi_squared_distribution<double> chi(5.0);
    Sample s(n, 2);
    const double l21 = 1.0, l22 = std::sqrt(3.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = standard_normal(g), z2 = standard_normal(g);
        const double k = std::sqrt(5.0 / chi(g));
        s(i, 0) = z1 * k;
        s(i, 1) = (l21 * z1 + l22 * z2) * k;
    }
    return s;
}

// ---- textual family specs, e.g. "clayton:theta=2,d=3" -----------------------------

// (X, eps / X^2) with X, eps ~ N(5, 1) independent.
inline Sample sample_noise_ratio_sq(std::size_t n, std::uint64_t seed) {
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 5.0 + standard_normal(g);
        const double e = 5.0 + standard_normal(g);
        s(i, 0) = x;
        s(i, 1) = e / (x * x);
    }
    return s;
}

// (X, X / eps) with X ~ N(2, 1), eps ~ N(5, 1) independent.
inline Sample sample_noise_ratio(std::size_t n, std::uint64_t seed) {
    Engine g = make_engine(seed);
    Sample s(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 + standard_normal(g);
        const double e = 5.0 + standard_normal(g);
        s(i, 0) = x;
        s(i, 1) = x / e;
    }
    return s;
}

struct FamilySpec {
    std::string name;
    std::map<std::string, double> params;

    double get(const std::string& key) const {
        auto it = params.find(key);
        if (it == params.end())
            throw config_error("family '" + name + "': missing parameter '" + key + "'");
        return it->second;
    }
    double get(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    std::string str() const {
        std::ostringstream os;
        os << name;
        char sep = ':';
        for (const auto& [k, v] : params) {
            os << sep << k << '=' << v;
            sep = ',';
        }
        return os.str();
    }
};

inline FamilySpec parse_family(const std::string& text) {
    FamilySpec f;
    const auto colon = text.find(':');
    f.name = text.substr(0, colon);
    std::transform(f.name.begin(), f.name.end(), f.name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (colon == std::string::npos)
        return f;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw config_error("family spec: expected key=value, got '" + item + "'");
        try {
            f.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw config_error("family spec: bad number in '" + item + "'");
        }
    }
    return f;
}

inline int spec_dim(const FamilySpec& f, int fallback) {
    const double d = f.get("d", fallback);
    if (d != std::floor(d) || d < 2)
        throw config_error("family spec: d must be an integer >= 2");
    return static_cast<int>(d);
}

inline Sample sample_family(const FamilySpec& f, std::size_t n, std::uint64_t seed) {
    const std::string& k = f.name;
    if (k == "uniform")
        return sample_uniform(spec_dim(f, 2), n, seed);
    if (k == "normal") {
        if (f.params.count("r12"))
            return sample_general_normal(sigma3(f.get("r12"), f.get("r13"), f.get("r23")), n, seed);
        return sample_equicorrelated_normal(spec_dim(f, 2), f.get("rho"), n, seed);
    }
    if (k == "clayton")
        return sample_archimedean(Archimedean::clayton, f.get("theta"), spec_dim(f, 3), n, seed);
    if (k == "frank")
        return sample_archimedean(Archimedean::frank, f.get("theta"), spec_dim(f, 3), n, seed);
    if (k == "gumbel")
        return sample_archimedean(Archimedean::gumbel, f.get("theta"), spec_dim(f, 3), n, seed);
    if (k == "joe")
        return sample_archimedean(Archimedean::joe, f.get("theta"), spec_dim(f, 3), n, seed);
    if (k == "fgm")
        return sample_fgm(FgmVariant::C, f.get("theta"), n, seed);
    if (k == "fgmt")
        return sample_fgm(FgmVariant::Ctilde, f.get("theta"), n, seed);
    if (k == "circle")
        return sample_circle(n, seed);
    if (k == "exp")
        return sample_bivariate_exp(f.get("l1"), f.get("l2"), f.get("l12"), n, seed);
    if (k == "morgenstern")
        return sample_morgenstern(f.get("a"), n, seed);
    if (k == "plackett")
        return sample_plackett(f.get("s"), n, seed);
    if (k == "alihaq")
        return sample_alihaq(f.get("a"), f.get("p"), n, seed);
    if (k == "gumbelexp")
        return sample_gumbel_exp(f.get("e"), n, seed);
    if (k == "t5")
        return sample_t5(n, seed);
    if (k == "noise1")
        return sample_noise_ratio_sq(n, seed);
    if (k == "noise2")
        return sample_noise_ratio(n, seed);
    throw config_error("unknown family '" + k + "'");
}

} // namespace kendep
