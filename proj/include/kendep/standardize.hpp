#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "distributions.hpp"
#include "errors.hpp"
#include "orthant.hpp"
#include "parallel.hpp"

namespace kendep {

inline constexpr int kPhiDegree = 7;
inline constexpr int kPhiGrid = 2049;

struct RhoIndexGrid {
    std::vector<double> rho;
    std::vector<double> I_of_rho;
    std::size_t n = 0, N = 0;
    std::uint64_t seed = 0;
};

struct PhiProvenance {
    bool builtin = true;
    std::uint64_t seed = 0;
    std::size_t n = 0, N = 0;
    RhoIndexGrid grid;
};

// Monotone polynomial phi_d: [0,1] -> [0,1], coefficients constant term first.
struct StandardizerPhi {
    int d = 2;
    std::array<double, kPhiDegree + 1> coef{};
    PhiProvenance provenance;

    double operator()(double t) const {
        double v = 0.0;
        for (int k = kPhiDegree; k >= 0; --k)
            v = v * t + coef[k];
        return v;
    }

    double derivative(double t) const {
        double v = 0.0;
        for (int k = kPhiDegree; k >= 1; --k)
            v = v * t + k * coef[k];
        return v;
    }

    // phi(0) = 0, phi(1) = 1 within tol and phi' >= 0 on the check grid.
    bool satisfies_invariants(double tol = 1e-9) const {
        if (std::abs((*this)(0.0)) > tol || std::abs((*this)(1.0) - 1.0) > tol)
            return false;
        for (int k = 0; k < kPhiGrid; ++k)
            if (derivative(static_cast<double>(k) / (kPhiGrid - 1)) < 0.0)
                return false;
        return true;
    }
};

inline StandardizerPhi phi_builtin(int d) {
    StandardizerPhi p;
    p.d = d;
    if (d == 2)
        p.coef = {0.0, 2.070, 0.061, -2.471, 1.307, 0.033, 0.0, 0.0};
    else if (d == 3)
        p.coef = {0.0, 1.62, 4.45, -13.48, 12.13, -3.72, 0.0, 0.0};
    else
        throw config_error("no built-in standardizer for d = " + std::to_string(d) +
                           "; calibrate one with calibrate_phi");
    return p;
}

inline double index_I_star(double I, const StandardizerPhi& phi) {
    if (!(I >= 0.0))
        throw domain_error("I* : index must be >= 0");
    return std::clamp(phi(std::min(I, 1.0)), 0.0, 1.0);
}

inline DependenceReport dependence_report(const AukVector& v, const StandardizerPhi& phi) {
    DependenceReport r;
    r.auk_vector = v;
    r.I = index_I(v);
    r.I_exceeds_one = r.I > 1.0;
    r.I_star = index_I_star(r.I, phi);
    r.level = classify_level(r.I_star);
    return r;
}

namespace detail {

// min 1/2 c'Hc - f'c  s.t.  A c >= b, from a strictly feasible start.
// Primal active set; constraints are added only while linearly independent of
// the working set.
inline Eigen::VectorXd active_set_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                     const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                     Eigen::VectorXd c) {
    const Eigen::Index nv = H.rows();
    std::vector<Eigen::Index> work, skip;
    for (int iter = 0; iter < 20000; ++iter) {
        const Eigen::Index nw = static_cast<Eigen::Index>(work.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + nw, nv + nw);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + nw);
        kkt.topLeftCorner(nv, nv) = H;
        for (Eigen::Index k = 0; k < nw; ++k) {
            kkt.block(0, nv + k, nv, 1) = -A.row(work[k]).transpose();
            kkt.block(nv + k, 0, 1, nv) = -A.row(work[k]);
        }
        rhs.head(nv) = f - H * c;
        Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
        Eigen::VectorXd p = sol.head(nv);
        // the monomial Hessian is badly conditioned, so p never solves to exact
        // zero; stop when the full step would not lower the objective
        const double gain = rhs.head(nv).dot(p) - 0.5 * p.dot(H * p);
        const double obj = 0.5 * c.dot(H * c) - f.dot(c);
        if (gain <= 1e-13 * (1.0 + std::abs(obj))) {
            Eigen::Index drop = -1;
            double worst = -1e-12;
            for (Eigen::Index k = 0; k < nw; ++k)
                if (sol[nv + k] < worst) {
                    worst = sol[nv + k];
                    drop = k;
                }
            if (drop < 0)
                return c;
            work.erase(work.begin() + drop);
            skip.clear();
            continue;
        }
        double step = 1.0;
        Eigen::Index block = -1;
        const Eigen::VectorXd ap = A * p;
        const Eigen::VectorXd slack = A * c - b;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            if (std::find(work.begin(), work.end(), i) != work.end() ||
                std::find(skip.begin(), skip.end(), i) != skip.end())
                continue;
            // directions tangent to the constraint up to rounding never block
            if (ap[i] < -1e-11 * A.row(i).norm() * p.norm()) {
                const double s = std::max(slack[i], 0.0) / -ap[i];
                if (s < step) {
                    step = s;
                    block = i;
                }
            }
        }
        if (block < 0) {
            c += p;
            skip.clear();
            continue;
        }
        Eigen::MatrixXd rows(nw + 1, nv);
        for (Eigen::Index k = 0; k < nw; ++k)
            rows.row(k) = A.row(work[k]);
        rows.row(nw) = A.row(block);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(rows);
        lu.setThreshold(1e-10);
        if (lu.rank() == nw + 1) {
            c += step * p;
            work.push_back(block);
            skip.clear();
        } else {
            // a dependent constraint is active only up to rounding; move past it
            skip.push_back(block);
        }
    }
    throw fit_error("monotone fit: active-set iteration did not converge");
}

} // namespace detail

// Weight of the roughness penalty int_0^1 p''(x)^2 dx. Six calibration points
// do not determine eight coefficients; the penalty picks the smoothest fit.
inline constexpr double kPhiRoughness = 1e-6;

inline StandardizerPhi fit_monotone_polynomial(const std::vector<double>& x, const std::vector<double>& y,
                                               double roughness = kPhiRoughness) {
    constexpr int K = kPhiDegree + 1;
    if (x.size() != y.size() || x.size() < 4)
        throw fit_error("monotone fit: need at least 4 (x, y) points");
    for (std::size_t k = 1; k < x.size(); ++k)
        if (!(x[k] > x[k - 1]))
            throw fit_error("monotone fit: x must be strictly increasing");
    if (x.front() != 0.0 || y.front() != 0.0 || x.back() != 1.0 || y.back() != 1.0)
        throw fit_error("monotone fit: points (0,0) and (1,1) must be included");
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); }))
        throw fit_error("monotone fit: degenerate data (all y equal)");

    Eigen::MatrixXd V(x.size(), K);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int k = 0; k < K; ++k)
            V(static_cast<Eigen::Index>(i), k) = std::pow(x[i], k);
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));

    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(K, K);
    for (int a = 2; a < K; ++a)
        for (int b = 2; b < K; ++b)
            R(a, b) = double(a * (a - 1) * b * (b - 1)) / (a + b - 3);

    Eigen::MatrixXd H = 2.0 * (V.transpose() * V + roughness * R);
    Eigen::VectorXd f = 2.0 * V.transpose() * yv;

    // derivative rows on the grid; a small positive floor keeps phi' > 0 after
    // rounding
    Eigen::MatrixXd A(kPhiGrid, K);
    for (int g = 0; g < kPhiGrid; ++g) {
        const double t = static_cast<double>(g) / (kPhiGrid - 1);
        A(g, 0) = 0.0;
        for (int k = 1; k < K; ++k)
            A(g, k) = k * std::pow(t, k - 1);
    }
    Eigen::VectorXd b = Eigen::VectorXd::Constant(kPhiGrid, 1e-10);

    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(K);
    c0[1] = 1.0;
    Eigen::VectorXd c = detail::active_set_qp(H, f, A, b, c0);

    c[0] = 0.0;
    const double total = c.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw fit_error("monotone fit: normalization failed (nonpositive coefficient sum)");
    c /= total;

    StandardizerPhi phi;
    for (int k = 0; k < K; ++k)
        phi.coef[k] = c[k];
    if (!phi.satisfies_invariants())
        throw fit_error("monotone fit: result violates endpoint or monotonicity invariants");
    return phi;
}

// Mean of I-hat over N samples of size n from N_d(0, Sigma_d(rho)).
inline double mc_index_for_equicorrelated_normal(int d, double rho, std::size_t n, std::size_t N,
                                                 std::uint64_t seed) {
    check_equicorrelated(d, rho);
    if (n < 2 || N < 1)
        throw domain_error("mc index: need n >= 2 and N >= 1");
    std::vector<double> vals(N);
    parallel_for(N, [&](std::size_t j) {
        vals[j] = index_I(sample_equicorrelated_normal(d, rho, n, derive_seed(seed, j)));
    });
    double s = 0.0;
    for (double v : vals)
        s += v;
    return s / static_cast<double>(N);
}

inline const std::vector<double>& calibration_rhos() {
    static const std::vector<double> r{0.0, 0.4, 0.8, 0.95, 0.99, 1.0};
    return r;
}

inline constexpr std::size_t kPhiDefaultN = 2000;
inline constexpr std::size_t kPhiDefaultReps = 50;

inline StandardizerPhi calibrate_phi(int d, std::size_t n = kPhiDefaultN, std::size_t N = kPhiDefaultReps,
                                     std::uint64_t seed = 1) {
    check_dim(static_cast<std::size_t>(d));
    RhoIndexGrid grid;
    grid.rho = calibration_rhos();
    grid.n = n;
    grid.N = N;
    grid.seed = seed;
    grid.I_of_rho.resize(grid.rho.size());
    for (std::size_t j = 0; j < grid.rho.size(); ++j) {
        const double r = grid.rho[j];
        if (r == 0.0 || r == 1.0)
            grid.I_of_rho[j] = r;
        else
            grid.I_of_rho[j] = mc_index_for_equicorrelated_normal(d, r, n, N, derive_seed(seed, j));
    }
    for (std::size_t j = 1; j < grid.rho.size(); ++j)
        if (!(grid.I_of_rho[j] > grid.I_of_rho[j - 1]))
            throw fit_error("calibrate phi: Monte Carlo I(rho) is not increasing; raise n or N");
    StandardizerPhi phi = fit_monotone_polynomial(grid.I_of_rho, grid.rho);
    phi.d = d;
    phi.provenance.builtin = false;
    phi.provenance.seed = seed;
    phi.provenance.n = n;
    phi.provenance.N = N;
    phi.provenance.grid = grid;
    return phi;
}

} // namespace kendep
