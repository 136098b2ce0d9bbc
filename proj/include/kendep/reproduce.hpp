#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "independence.hpp"
#include "orthant.hpp"
#include "standardize.hpp"

namespace kendep {

struct CellResult {
    std::string row, col;
    double paper = 0.0, ours = 0.0, tol = 0.0;
    bool pass = false;
};

struct TableResult {
    std::string id, title;
    std::size_t reps = 0, paper_reps = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> rows, cols;
    std::vector<CellResult> cells;
    std::vector<std::string> notes;

    std::size_t passed() const {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.pass; }));
    }
    bool pass() const { return passed() == cells.size(); }
};

struct ReproduceOptions {
    double scale = 0.0; // 0 selects the desk defaults
    std::uint64_t seed = 1;
    std::string data_dir = ".";
    std::optional<StandardizerPhi> phi4; // for the full biomarker vector
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::size_t reps_for(const ReproduceOptions& o, std::size_t desk, std::size_t paper) {
    if (o.scale <= 0.0)
        return desk;
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(o.scale * static_cast<double>(paper))));
}

inline std::pair<double, double> mean_se(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2)
        return {m, 0.0};
    return {m, sample_sd(v) / std::sqrt(static_cast<double>(v.size()))};
}

inline void add_cell(TableResult& t, std::string row, std::string col, double paper, double ours, double tol) {
    t.cells.push_back(CellResult{std::move(row), std::move(col), paper, ours, tol, std::abs(ours - paper) <= tol});
}

inline std::string n_label(std::size_t n) { return "n=" + std::to_string(n); }

using Generator = std::function<Sample(std::size_t n, std::uint64_t seed)>;

struct IndexCase {
    std::string id, title;
    Generator gen;
    std::array<double, 4> I, I_star;
};

inline const std::array<std::size_t, 4>& index_ns() {
    static const std::array<std::size_t, 4> ns{100, 200, 500, 1000};
    return ns;
}

inline Generator normal3(double r12, double r13, double r23) {
    return [=](std::size_t n, std::uint64_t s) { return sample_general_normal(sigma3(r12, r13, r23), n, s); };
}
inline Generator archimedean3(Archimedean f, double theta) {
    return [=](std::size_t n, std::uint64_t s) { return sample_archimedean(f, theta, 3, n, s); };
}
inline Generator fgm3(FgmVariant v, double theta) {
    return [=](std::size_t n, std::uint64_t s) { return sample_fgm(v, theta, n, s); };
}

inline const std::vector<IndexCase>& index_cases() {
    using A = Archimedean;
    using V = FgmVariant;
    static const std::vector<IndexCase> c{
        {"T3a", "N3 (0,0,0)", normal3(0, 0, 0), {.097, .059, .032, .022}, {.186, .109, .057, .037}},
        {"T3b", "N3 (1,1,1)", normal3(1, 1, 1), {.739, .833, .912, .947}, {.985, .994, .998, .999}},
        {"T3c", "N3 (-.5,-.5,.5)", normal3(-.5, -.5, .5), {.222, .229, .236, .239}, {.459, .472, .487, .493}},
        {"T3d", "N3 (-.5,-.5,-.5)", normal3(-.5, -.5, -.5), {.418, .464, .505, .525}, {.794, .846, .885, .900}},
        {"T3e", "N3 (.1,.2,-.9)", normal3(.1, .2, -.9), {.382, .413, .438, .449}, {.745, .787, .818, .829}},
        {"T3f", "N3 (.7,.5,0)", normal3(.7, .5, 0), {.311, .330, .348, .355}, {.631, .664, .693, .704}},
        {"T3g", "N3 (.2,-.8,0)", normal3(.2, -.8, 0), {.291, .307, .322, .327}, {.594, .624, .651, .659}},
        {"T3h", "N3 (-.3,-.3,-.3)", normal3(-.3, -.3, -.3), {.192, .192, .197, .200}, {.395, .395, .406, .412}},
        {"T3i", "N3 (.2,.3,.4)", normal3(.2, .3, .4), {.165, .156, .156, .157}, {.336, .316, .317, .319}},
        {"T3j", "N3 (-.1,-.1,.2)", normal3(-.1, -.1, .2), {.114, .089, .077, .075}, {.224, .170, .146, .141}},
        {"T4a", "Clayton 2", archimedean3(A::clayton, 2), {.315, .332, .348, .354}, {.637, .666, .694, .703}},
        {"T4b", "Clayton 5", archimedean3(A::clayton, 5), {.442, .479, .507, .517}, {.821, .860, .886, .893}},
        {"T4c", "Frank 4", archimedean3(A::frank, 4), {.241, .247, .255, .260}, {.497, .510, .527, .535}},
        {"T4d", "Frank 8", archimedean3(A::frank, 8), {.354, .378, .396, .403}, {.702, .739, .764, .774}},
        {"T4e", "Gumbel 2", archimedean3(A::gumbel, 2), {.316, .333, .348, .354}, {.638, .668, .693, .703}},
        {"T4f", "Gumbel 4", archimedean3(A::gumbel, 4), {.471, .509, .539, .550}, {.853, .887, .910, .918}},
        {"T4g", "Joe 2", archimedean3(A::joe, 2), {.240, .248, .258, .262}, {.495, .512, .532, .540}},
        {"T4h", "Joe 5", archimedean3(A::joe, 5), {.416, .449, .475, .484}, {.790, .829, .857, .866}},
        {"T5a", "FGM C 0.5", fgm3(V::C, .5), {.105, .075, .059, .055}, {.205, .141, .108, .100}},
        {"T5b", "FGM C 0.7", fgm3(V::C, .7), {.110, .087, .076, .074}, {.220, .167, .144, .138}},
        {"T5c", "FGM C 0.9", fgm3(V::C, .9), {.123, .102, .095, .094}, {.245, .198, .184, .181}},
        {"T5d", "FGM C 1", fgm3(V::C, 1), {.129, .110, .105, .104}, {.257, .216, .204, .203}},
        {"T5e", "FGM C~ 0.5", fgm3(V::Ctilde, .5), {.098, .062, .037, .028}, {.189, .114, .065, .049}},
        {"T5f", "FGM C~ 0.7", fgm3(V::Ctilde, .7), {.098, .063, .041, .034}, {.190, .117, .074, .059}},
        {"T5g", "FGM C~ 0.9", fgm3(V::Ctilde, .9), {.099, .066, .046, .040}, {.192, .121, .082, .071}},
        {"T5h", "FGM C~ 1", fgm3(V::Ctilde, 1), {.100, .067, .049, .043}, {.194, .125, .088, .077}},
    };
    return c;
}

struct PowerRow {
    std::string label;
    Generator gen;
    std::array<double, 9> paper; // percent
};

inline const std::array<std::size_t, 9>& power_ns() {
    static const std::array<std::size_t, 9> ns{50, 100, 200, 300, 500, 750, 1000, 1500, 2000};
    return ns;
}

inline Generator family_gen(const std::string& spec) {
    const FamilySpec f = parse_family(spec);
    return [f](std::size_t n, std::uint64_t s) { return sample_family(f, n, s); };
}

inline std::vector<PowerRow> power_rows_normal() {
    return {
        {"rho=0", family_gen("normal:rho=0"), {5.2, 4.9, 4.8, 4.9, 5, 5.1, 4.9, 5.1, 5}},
        {"rho=0.1", family_gen("normal:rho=0.1"), {14.7, 22, 32.1, 42.9, 62.1, 76.6, 86.5, 95.2, 98.2}},
        {"rho=0.2", family_gen("normal:rho=0.2"), {35.2, 54.5, 80.4, 93.3, 99, 99.9, 100, 100, 100}},
        {"rho=0.3", family_gen("normal:rho=0.3"), {59.2, 84.8, 98.9, 100, 100, 100, 100, 100, 100}},
        {"rho=0.4", family_gen("normal:rho=0.4"), {84.6, 97.6, 100, 100, 100, 100, 100, 100, 100}},
        {"rho=0.5", family_gen("normal:rho=0.5"), {95.6, 99.9, 100, 100, 100, 100, 100, 100, 100}},
        {"rho=0.6", family_gen("normal:rho=0.6"), {99.4, 100, 100, 100, 100, 100, 100, 100, 100}},
    };
}

inline std::vector<PowerRow> power_rows_nonnormal() {
    constexpr std::array<double, 9> full{100, 100, 100, 100, 100, 100, 100, 100, 100};
    return {
        {"exp{2,3,1.3}", family_gen("exp:l1=2,l2=3,l12=1.3"), {97.3, 100, 100, 100, 100, 100, 100, 100, 100}},
        {"t5", family_gen("t5"), {93.4, 99.9, 100, 100, 100, 100, 100, 100, 100}},
        {"Morgenstern{0.5}", family_gen("morgenstern:a=0.5"), {27.4, 42.7, 66.1, 82.1, 95.8, 99, 99.9, 100, 100}},
        {"Morgenstern{5}", family_gen("morgenstern:a=5"), full},
        {"Plackett{1.25}", family_gen("plackett:s=1.25"), {11.4, 14.1, 22.9, 29.5, 40.3, 53.2, 68.7, 82, 90.5}},
        {"Plackett{2}", family_gen("plackett:s=2"), {46.8, 70.4, 92.1, 98.7, 99.9, 100, 100, 100, 100}},
        {"AliHaq{0.1,0.5}", family_gen("alihaq:a=0.1,p=0.5"), {17.2, 26.3, 39, 51.7, 69, 84.6, 92.4, 99.1, 100}},
        {"AliHaq{0.9,0.5}", family_gen("alihaq:a=0.9,p=0.5"), full},
        {"Gumbel{0.9}", family_gen("gumbelexp:e=0.9"), {22.1, 35.3, 52.6, 68.1, 85.9, 95.4, 98.7, 100, 100}},
        {"(X,eps/X^2)", family_gen("noise1"), full},
        {"(X,X/eps)", family_gen("noise2"), full},
        {"U{C(0,1)}", family_gen("circle"), {0, 0.2, 1.1, 3.1, 9.3, 16, 36.9, 69, 86.1}},
    };
}

inline TableResult run_index_table(const IndexCase& c, const ReproduceOptions& o) {
    TableResult t;
    t.id = c.id;
    t.title = c.title;
    t.paper_reps = 1000;
    t.reps = reps_for(o, 200, 1000);
    t.seed = derive_seed(o.seed, fnv1a(c.id));
    t.rows = {"I", "I*"};
    const StandardizerPhi phi = phi_builtin(3);
    for (std::size_t k = 0; k < index_ns().size(); ++k) {
        const std::size_t n = index_ns()[k];
        t.cols.push_back(n_label(n));
        std::vector<double> iv(t.reps), sv(t.reps);
        const std::uint64_t base = derive_seed(t.seed, n);
        parallel_for(t.reps, [&](std::size_t j) {
            iv[j] = index_I(c.gen(n, derive_seed(base, j)));
            sv[j] = index_I_star(iv[j], phi);
        });
        const auto [mi, sei] = mean_se(iv);
        const auto [ms, ses] = mean_se(sv);
        add_cell(t, "I", n_label(n), c.I[k], mi, std::max(0.01, 3.0 * sei));
        add_cell(t, "I*", n_label(n), c.I_star[k], ms, std::max(0.02, 3.0 * ses));
    }
    t.notes.push_back("tolerance max(0.01, 3 se) for I and max(0.02, 3 se) for I*");
    return t;
}

inline TableResult run_power_table(const std::string& id, const std::string& title, const std::vector<PowerRow>& rows,
                                   const ReproduceOptions& o) {
    TableResult t;
    t.id = id;
    t.title = title;
    t.paper_reps = 1000;
    t.reps = reps_for(o, 200, 1000);
    t.seed = derive_seed(o.seed, fnv1a(id));
    const std::size_t cal_r = o.scale <= 0.0 ? 10000 : std::max<std::size_t>(1000, static_cast<std::size_t>(std::llround(o.scale * 1e5)));
    const SigmaPi sigma = sigma_pi_exact_d2();
    std::vector<std::optional<CalibrationTable>> tables;
    for (std::size_t n : power_ns()) {
        t.cols.push_back(n_label(n));
        if (uses_asymptotic_critical(2, n))
            tables.emplace_back();
        else
            tables.emplace_back(calibrate_percentiles(2, n, cal_r, derive_seed(derive_seed(o.seed, 0xCA1B), n), sigma));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const PowerRow& row = rows[r];
        t.rows.push_back(row.label);
        for (std::size_t k = 0; k < power_ns().size(); ++k) {
            const std::size_t n = power_ns()[k];
            TestPolicy pol;
            pol.sigma = sigma;
            pol.calibration = tables[k];
            pol.allow_calibration = false;
            std::vector<char> rej(t.reps);
            const std::uint64_t base = derive_seed(derive_seed(t.seed, r), n);
            parallel_for(t.reps, [&](std::size_t j) {
                rej[j] = run_independence_test(row.gen(n, derive_seed(base, j)), 0.05, pol).reject;
            });
            const double pct = 100.0 * static_cast<double>(std::count(rej.begin(), rej.end(), 1)) / static_cast<double>(t.reps);
            const double p = row.paper[k] / 100.0;
            const double se = 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(t.reps));
            add_cell(t, row.label, n_label(n), row.paper[k], pct, std::max(3.0, 3.0 * se));
        }
    }
    t.notes.push_back("rejection rates in percent at alpha = 0.05; calibrated critical values from r = " +
                      std::to_string(cal_r) + " null samples for n <= 1000");
    t.notes.push_back("tolerance max(3 points, 3 binomial se at the published rate)");
    return t;
}

inline TableResult run_t1(const ReproduceOptions& o) {
    static const std::array<std::size_t, 11> ns{30, 50, 70, 100, 150, 200, 300, 400, 500, 750, 1000};
    static const double paper[3][12] = {
        {2.30, 2.11, 2.01, 1.93, 1.84, 1.79, 1.74, 1.72, 1.71, 1.68, 1.67, 1.65},
        {2.62, 2.44, 2.34, 2.25, 2.17, 2.12, 2.06, 2.05, 2.03, 2.01, 1.98, 1.96},
        {3.19, 3.05, 2.95, 2.87, 2.78, 2.75, 2.68, 2.67, 2.65, 2.63, 2.60, 2.57}};
    TableResult t;
    t.id = "T1";
    t.title = "percentiles of |z_n|, d = 2";
    t.paper_reps = 100000;
    t.reps = reps_for(o, 10000, 100000);
    t.seed = derive_seed(o.seed, fnv1a(t.id));
    const auto& lv = calibrated_levels();
    for (double l : lv)
        t.rows.push_back("p" + format_double(l));
    const SigmaPi sigma = sigma_pi_exact_d2();
    for (std::size_t k = 0; k < ns.size(); ++k) {
        t.cols.push_back(n_label(ns[k]));
        const CalibrationTable tab = calibrate_percentiles(2, ns[k], t.reps, derive_seed(t.seed, ns[k]), sigma);
        for (std::size_t q = 0; q < lv.size(); ++q) {
            // Standard error of a sample quantile, with the normal density as a stand-in.
            const double x = tab.percentiles[q];
            const double dens = 2.0 * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            const double se = std::sqrt(lv[q] * (1.0 - lv[q]) / static_cast<double>(t.reps)) / dens;
            add_cell(t, t.rows[q], n_label(ns[k]), paper[q][k], x, std::max(0.05, 3.0 * se));
        }
    }
    t.cols.push_back("n=inf");
    for (std::size_t q = 0; q < lv.size(); ++q)
        add_cell(t, t.rows[q], "n=inf", paper[q][11], normal_upper_quantile((1.0 - lv[q]) / 2.0), 0.005);
    t.notes.push_back("tolerance max(0.05, 3 se of the sample quantile)");
    return t;
}

inline TableResult run_t2(const ReproduceOptions& o) {
    TableResult t;
    t.id = "T2";
    t.title = "Monte Carlo sigma_Pi, d = 2..10";
    t.paper_reps = 10000;
    t.reps = reps_for(o, 2000, 10000);
    t.seed = derive_seed(o.seed, fnv1a(t.id));
    const std::size_t n = o.scale >= 1.0 ? 50000 : 5000;
    t.rows = {"sigma"};
    for (int d = 2; d <= 10; ++d) {
        t.cols.push_back("d=" + std::to_string(d));
        const SigmaPi s = estimate_sigma_pi(d, t.reps, n, derive_seed(t.seed, static_cast<std::uint64_t>(d)));
        add_cell(t, "sigma", t.cols.back(), kPaperSigmaTable[d - 2], s.value, 0.005);
    }
    t.notes.push_back("n = " + std::to_string(n) + " per replicate; tolerance 0.005");
    return t;
}

inline TableResult run_t6(const ReproduceOptions& o) {
    TableResult t;
    t.id = "T6";
    t.title = "biomarker indices";
    t.seed = o.seed;
    const CsvTable data = read_csv(o.data_dir + "/biomarkers.csv");
    const auto& names = data.header;
    auto label = [&](const std::vector<std::size_t>& cols) {
        std::string s = "(";
        for (std::size_t k = 0; k < cols.size(); ++k)
            s += (k ? "," : "") + names[cols[k]];
        return s + ")";
    };
    t.rows = {"I", "I*", "tau"};
    const std::vector<std::vector<std::size_t>> pairs{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    const std::array<double, 6> pI{.176, .112, .099, .468, .083, .069}, pS{.354, .230, .204, .792, .171, .142},
        pT{.215, .092, .061, .619, .097, .077};
    const StandardizerPhi phi2 = phi_builtin(2), phi3 = phi_builtin(3);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Sample s = data.sample.select(pairs[k]);
        const double I = index_I(s);
        t.cols.push_back(label(pairs[k]));
        add_cell(t, "I", t.cols.back(), pI[k], I, 0.001);
        add_cell(t, "I*", t.cols.back(), pS[k], index_I_star(I, phi2), 0.02);
        add_cell(t, "tau", t.cols.back(), pT[k], kendall_tau_pairwise(s), 0.001);
    }
    const std::vector<std::vector<std::size_t>> triples{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    const std::array<double, 4> tI{.322, .146, .118, .296}, tS{.651, .294, .232, .605};
    for (std::size_t k = 0; k < triples.size(); ++k) {
        const double I = index_I(data.sample.select(triples[k]));
        t.cols.push_back(label(triples[k]));
        add_cell(t, "I", t.cols.back(), tI[k], I, 0.001);
        add_cell(t, "I*", t.cols.back(), tS[k], index_I_star(I, phi3), 0.02);
    }
    const StandardizerPhi phi4 = o.phi4 ? *o.phi4 : calibrate_phi(4, kPhiDefaultN, kPhiDefaultReps, o.seed);
    const double I = index_I(data.sample);
    t.cols.push_back(label({0, 1, 2, 3}));
    add_cell(t, "I", t.cols.back(), 0.2546, I, 0.0005);
    add_cell(t, "I*", t.cols.back(), 0.561, index_I_star(I, phi4), 0.02);
    t.notes.push_back("I* of the full vector uses phi_4 calibrated with seed " + std::to_string(phi4.provenance.seed) +
                      ", n = " + std::to_string(phi4.provenance.n) + ", N = " + std::to_string(phi4.provenance.N));
    return t;
}

inline TableResult run_ts(const ReproduceOptions& o) {
    static const std::array<double, 25> rho{0,   .05, .10, .15, .20, .25, .30, .35, .40, .45, .50, .55, .60,
                                            .65, .70, .75, .80, .85, .90, .95, .97, .98, .99, .995, 1};
    static const std::array<double, 25> paper{0,    .027, .052, .077, .101, .124, .148, .171, .194,
                                              .218, .243, .267, .294, .321, .352, .385, .423, .467,
                                              .524, .609, .662, .701, .758, .841, 1};
    TableResult t;
    t.id = "TS";
    t.title = "I(rho) for N3(0, Sigma3(rho))";
    t.paper_reps = 50;
    t.reps = reps_for(o, 50, 50);
    t.seed = derive_seed(o.seed, fnv1a(t.id));
    const std::size_t n = 2000;
    t.rows = {"I"};
    for (std::size_t k = 0; k < rho.size(); ++k) {
        t.cols.push_back("rho=" + format_double(rho[k]));
        std::vector<double> v(t.reps);
        const std::uint64_t base = derive_seed(t.seed, k);
        parallel_for(t.reps, [&](std::size_t j) {
            v[j] = index_I(sample_equicorrelated_normal(3, rho[k], n, derive_seed(base, j)));
        });
        const auto [m, se] = mean_se(v);
        add_cell(t, "I", t.cols.back(), paper[k], m, std::max(rho[k] <= 0.5 ? 0.015 : 0.02, 3.0 * se));
    }
    t.notes.push_back("n = 2000 per replicate; tolerance max(0.015 or 0.02 above rho = 0.5, 3 se)");
    return t;
}

} // namespace detail

inline std::vector<std::string> table_ids() {
    std::vector<std::string> ids{"T1", "T2"};
    for (const auto& c : detail::index_cases())
        ids.push_back(c.id);
    for (const char* s : {"T6", "T7", "T8", "TS"})
        ids.emplace_back(s);
    return ids;
}

inline TableResult reproduce_table(const std::string& id, const ReproduceOptions& o = {}) {
    if (id == "T1")
        return detail::run_t1(o);
    if (id == "T2")
        return detail::run_t2(o);
    if (id == "T6")
        return detail::run_t6(o);
    if (id == "T7")
        return detail::run_power_table("T7", "rejection rates, bivariate normal", detail::power_rows_normal(), o);
    if (id == "T8") {
        auto t = detail::run_power_table("T8", "power, bivariate non-normal", detail::power_rows_nonnormal(), o);
        t.notes.push_back("spiral rows omitted: their generator is not specified");
        return t;
    }
    if (id == "TS")
        return detail::run_ts(o);
    for (const auto& c : detail::index_cases())
        if (c.id == id)
            return detail::run_index_table(c, o);
    throw config_error("unknown table id '" + id + "'");
}

// Our values in the paper's row/column layout.
inline void write_table_layout(std::ostream& out, const TableResult& t) {
    out << "row";
    for (const auto& c : t.cols)
        out << ',' << c;
    out << '\n';
    for (const auto& r : t.rows) {
        out << r;
        for (const auto& c : t.cols) {
            out << ',';
            for (const auto& cell : t.cells)
                if (cell.row == r && cell.col == c)
                    out << format_double(cell.ours);
        }
        out << '\n';
    }
}

inline void write_cells_csv(std::ostream& out, const TableResult& t) {
    out << "table,row,col,paper,ours,tol,pass\n";
    for (const auto& c : t.cells)
        out << t.id << ',' << c.row << ',' << '"' << c.col << '"' << ',' << format_double(c.paper) << ','
            << format_double(c.ours) << ',' << format_double(c.tol) << ',' << (c.pass ? "true" : "false") << '\n';
}

} // namespace kendep
