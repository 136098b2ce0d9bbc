// kendep command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <kendep/cache.hpp>
#include <kendep/csv.hpp>
#include <kendep/diagnostics.hpp>
#include <kendep/distributions.hpp>
#include <kendep/independence.hpp>
#include <kendep/orthant.hpp>
#include <kendep/reproduce.hpp>
#include <kendep/standardize.hpp>

#ifndef KENDEP_DEFAULT_DATA_DIR
#define KENDEP_DEFAULT_DATA_DIR "data"
#endif

using namespace kendep;

namespace {

constexpr int kSchemaVersion = 1;

struct Common {
    std::string json_path;
    std::string cache_path;
    std::uint64_t seed = 1;
};

json envelope(const std::string& command) {
    return json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"inputs", json::object()},
                {"provenance", json::object()},
                {"results", json::object()}};
}

void emit(const json& doc, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write report '" + path + "'");
    out << doc.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty())
        return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

std::string resolve_cache(const std::string& flag) { return flag.empty() ? default_cache_path() : flag; }

json dataset_json(const std::string& path, const CsvTable& t) {
    return json{{"path", path}, {"n", t.sample.n()}, {"d", t.sample.d()}, {"columns", t.header}};
}

// phi for dimension d: built-in, cached, or a fresh calibration stored back.
StandardizerPhi resolve_phi(int d, CalibrationCache& cache, bool allow_calibration, std::uint64_t seed,
                            bool& cache_dirty) {
    if (d <= 3)
        return phi_builtin(d);
    if (auto p = cache.phi(d))
        return *p;
    if (!allow_calibration)
        throw config_error("no standardizer for d = " + std::to_string(d) +
                           " in the cache and calibration is disabled; run `kendep calibrate --d " +
                           std::to_string(d) + "`");
    StandardizerPhi p = calibrate_phi(d, kPhiDefaultN, kPhiDefaultReps, seed);
    cache.put_phi(p);
    cache_dirty = true;
    return p;
}

// Exact for d = 2, then the cache, then the shipped constants.
std::optional<SigmaPi> lookup_sigma(int d, const CalibrationCache& cache, const std::string& source) {
    if (source == "paper")
        return sigma_pi_paper_table(d);
    if (source == "shipped")
        return default_sigma_pi(d);
    if (d == 2)
        return sigma_pi_exact_d2();
    if (auto s = cache.sigma(d))
        return s;
    return default_sigma_pi(d);
}

json subset_result(const Sample& s, const std::vector<std::string>& names, const StandardizerPhi& phi) {
    const auto rep = dependence_report(auk_vector(s), phi);
    json j{{"columns", names},
           {"I", rep.I},
           {"I_star", rep.I_star},
           {"level", level_name(rep.level)},
           {"I_exceeds_one", rep.I_exceeds_one},
           {"phi_source", phi.provenance.builtin ? "builtin" : "calibrated"}};
    if (s.d() == 2)
        j["tau"] = kendall_tau_pairwise(s);
    return j;
}

void combinations(std::size_t d, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t m = start; m < d; ++m) {
        cur.push_back(m);
        combinations(d, k, m + 1, cur, out);
        cur.pop_back();
    }
}

int cmd_index(const Common& c, const std::string& input, const std::string& columns, bool all_subsets,
              bool no_calibrate) {
    const CsvTable t = read_csv(input, split_list(columns));
    const std::string cache_path = resolve_cache(c.cache_path);
    CalibrationCache cache = CalibrationCache::load(cache_path);
    bool dirty = false;

    std::vector<std::vector<std::size_t>> subsets;
    const std::size_t d = t.sample.d();
    if (all_subsets) {
        for (std::size_t k = 2; k < d; ++k) {
            std::vector<std::size_t> cur;
            combinations(d, k, 0, cur, subsets);
        }
    }
    std::vector<std::size_t> full(d);
    for (std::size_t m = 0; m < d; ++m)
        full[m] = m;
    subsets.push_back(full);

    json doc = envelope("index");
    doc["inputs"] = {{"dataset", dataset_json(input, t)}, {"all_subsets", all_subsets}, {"seed", c.seed}};
    std::map<int, StandardizerPhi> phis;
    json results = json::array();
    for (const auto& sub : subsets) {
        const int k = static_cast<int>(sub.size());
        if (!phis.count(k))
            phis.emplace(k, resolve_phi(k, cache, !no_calibrate, c.seed, dirty));
        std::vector<std::string> names;
        for (auto m : sub)
            names.push_back(t.header[m]);
        results.push_back(subset_result(t.sample.select(sub), names, phis.at(k)));
    }
    doc["results"]["subvectors"] = results;
    for (const auto& [k, p] : phis)
        doc["provenance"]["phi"]["d=" + std::to_string(k)] = phi_to_json(p);
    if (dirty) {
        cache.save(cache_path);
        doc["provenance"]["cache"] = cache_path;
    }
    emit(doc, c.json_path);
    return 0;
}

int cmd_test(const Common& c, const std::string& input, const std::string& columns, double alpha, bool no_calibrate,
             bool asymptotic, const std::string& sigma_source, std::size_t cal_r) {
    const CsvTable t = read_csv(input, split_list(columns));
    const int d = static_cast<int>(t.sample.d());
    const std::size_t n = t.sample.n();
    const std::string cache_path = resolve_cache(c.cache_path);
    CalibrationCache cache = CalibrationCache::load(cache_path);
    bool dirty = false;

    TestPolicy pol;
    pol.seed = c.seed;
    pol.allow_calibration = !no_calibrate;
    pol.allow_sigma_estimation = !no_calibrate;
    pol.force_asymptotic = asymptotic;
    pol.calibration_r = cal_r;
    pol.sigma = lookup_sigma(d, cache, sigma_source);
    if (!pol.sigma) {
        if (no_calibrate)
            throw config_error("no sigma for d = " + std::to_string(d) + " and calibration is disabled");
        pol.sigma = estimate_sigma_pi(d, pol.sigma_r, pol.sigma_n, derive_seed(c.seed, 0x5157));
        cache.put_sigma(*pol.sigma);
        dirty = true;
    }
    if (auto tab = cache.percentiles(d, n); tab && tab->sigma == pol.sigma->value)
        pol.calibration = tab;
    const TestReport rep = run_independence_test(t.sample, alpha, pol);
    if (rep.calibration && !pol.calibration) {
        cache.put_percentiles(*rep.calibration);
        dirty = true;
    }
    if (dirty)
        cache.save(cache_path);

    json doc = envelope("test");
    doc["inputs"] = {{"dataset", dataset_json(input, t)}, {"alpha", alpha}, {"seed", c.seed},
                     {"sigma_source", sigma_source}, {"force_asymptotic", asymptotic}};
    doc["provenance"]["sigma"] = sigma_to_json(rep.sigma);
    if (rep.calibration)
        doc["provenance"]["calibration"] = table_to_json(*rep.calibration);
    if (dirty)
        doc["provenance"]["cache"] = cache_path;
    doc["results"] = {{"n", rep.n},
                      {"d", rep.d},
                      {"auk_hat", rep.auk_hat},
                      {"z_n", rep.z_n},
                      {"sigma", rep.sigma.value},
                      {"critical_value", rep.critical_value},
                      {"critical_source", critical_source_name(rep.critical_source)},
                      {"alpha", rep.alpha},
                      {"reject", rep.reject},
                      {"p_value_asymptotic", rep.p_value_asymptotic}};
    emit(doc, c.json_path);
    return 0;
}

int cmd_calibrate(const Common& c, int d, const std::vector<std::size_t>& ns, std::size_t r, std::size_t sigma_r,
                  std::size_t sigma_n, bool with_phi, std::size_t phi_n, std::size_t phi_N) {
    check_dim(static_cast<std::size_t>(d));
    const std::string cache_path = resolve_cache(c.cache_path);
    CalibrationCache cache = CalibrationCache::load(cache_path);
    json doc = envelope("calibrate");
    doc["inputs"] = {{"d", d}, {"n", ns}, {"r", r}, {"sigma_r", sigma_r}, {"sigma_n", sigma_n},
                     {"phi", with_phi}, {"seed", c.seed}};

    const SigmaPi est = estimate_sigma_pi(d, sigma_r, sigma_n, derive_seed(c.seed, 0x5157));
    cache.put_sigma(est);
    doc["results"]["sigma"] = sigma_to_json(est);
    if (with_phi) {
        const StandardizerPhi p = calibrate_phi(d, phi_n, phi_N, c.seed);
        cache.put_phi(p);
        doc["results"]["phi"] = phi_to_json(p);
    }
    // Percentiles are tied to the sigma the test will use.
    const SigmaPi used = *lookup_sigma(d, cache, "auto");
    doc["results"]["percentiles"] = json::array();
    for (std::size_t n : ns) {
        const CalibrationTable tab = calibrate_percentiles(d, n, r, derive_seed(c.seed, n), used);
        cache.put_percentiles(tab);
        doc["results"]["percentiles"].push_back(table_to_json(tab));
    }
    cache.save(cache_path);
    doc["provenance"]["cache"] = cache_path;
    emit(doc, c.json_path);
    return 0;
}

int cmd_simulate(const Common& c, const std::string& family, std::size_t n, const std::string& out) {
    const FamilySpec spec = parse_family(family);
    const Sample s = sample_family(spec, n, c.seed);
    std::vector<std::string> header;
    for (std::size_t m = 0; m < s.d(); ++m)
        header.push_back("X" + std::to_string(m + 1));
    if (out.empty() || out == "-") {
        write_csv(std::cout, s, header);
    } else {
        std::ofstream f(out);
        if (!f)
            throw io_error("cannot write '" + out + "'");
        write_csv(f, s, header);
    }
    if (!c.json_path.empty()) {
        json doc = envelope("simulate");
        doc["inputs"] = {{"family", spec.str()}, {"n", n}, {"seed", c.seed}};
        doc["results"] = {{"path", out}, {"n", s.n()}, {"d", s.d()}};
        emit(doc, c.json_path);
    }
    return 0;
}

int cmd_kplot(const Common& c, const std::string& input, const std::string& columns, const std::string& out,
              std::size_t grid, double tol) {
    const CsvTable t = read_csv(input, split_list(columns));
    const auto curves = kendall_curves(orthant_pseudo_obs_all_rotations(t.sample), grid);
    const double used_tol = tol >= 0.0 ? tol : dkw_band(t.sample.n());
    const ClassDecision dec = classify_class_membership(curves, used_tol);

    std::ofstream f(out);
    if (!f)
        throw io_error("cannot write '" + out + "'");
    f << "pattern,t,k_emp,k_pi\n";
    for (const auto& cv : curves)
        for (std::size_t k = 0; k < cv.grid.size(); ++k)
            f << cv.pattern.str() << ',' << format_double(cv.grid[k]) << ',' << format_double(cv.k_emp[k]) << ','
              << format_double(cv.k_pi[k]) << '\n';

    json doc = envelope("kplot");
    doc["inputs"] = {{"dataset", dataset_json(input, t)}, {"grid", grid}, {"tolerance", used_tol}};
    auto names = [&](const std::vector<std::uint32_t>& w) {
        std::vector<std::string> v;
        for (auto p : w)
            v.push_back(SignPattern{p, static_cast<int>(t.sample.d())}.str());
        return v;
    };
    doc["results"] = {{"curves_path", out},
                      {"curves", curves.size()},
                      {"in_X1", dec.in_X1},
                      {"in_X2", dec.in_X2},
                      {"c1_witnesses", names(dec.c1_witnesses)},
                      {"c2_witnesses", names(dec.c2_witnesses)}};
    emit(doc, c.json_path);
    return 0;
}

int cmd_reproduce(const Common& c, std::vector<std::string> ids, double scale, const std::string& out_dir,
                  const std::string& data_dir) {
    if (ids.empty() || (ids.size() == 1 && ids[0] == "all"))
        ids = table_ids();
    const auto known = table_ids();
    for (const auto& id : ids)
        if (std::find(known.begin(), known.end(), id) == known.end())
            throw config_error("unknown table id '" + id + "'");

    ReproduceOptions opt;
    opt.scale = scale;
    opt.seed = c.seed;
    opt.data_dir = data_dir;
    CalibrationCache cache = CalibrationCache::load(resolve_cache(c.cache_path));
    opt.phi4 = cache.phi(4);

    if (!out_dir.empty())
        std::filesystem::create_directories(out_dir);
    json doc = envelope("reproduce");
    doc["inputs"] = {{"tables", ids}, {"scale", scale}, {"seed", c.seed}};
    json tables = json::array();
    for (const auto& id : ids) {
        const TableResult t = reproduce_table(id, opt);
        if (!out_dir.empty()) {
            std::ofstream lay(out_dir + "/" + id + ".csv");
            write_table_layout(lay, t);
            std::ofstream cells(out_dir + "/" + id + "_cells.csv");
            write_cells_csv(cells, t);
        }
        std::fprintf(stderr, "%-4s %-40s reps %zu/%zu  %zu/%zu cells %s\n", t.id.c_str(), t.title.c_str(), t.reps,
                     t.paper_reps, t.passed(), t.cells.size(), t.pass() ? "PASS" : "FAIL");
        json cells = json::array();
        for (const auto& cl : t.cells)
            cells.push_back({{"row", cl.row}, {"col", cl.col}, {"paper", cl.paper}, {"ours", cl.ours},
                             {"tol", cl.tol}, {"pass", cl.pass}});
        tables.push_back({{"id", t.id}, {"title", t.title}, {"reps", t.reps}, {"paper_reps", t.paper_reps},
                          {"seed", t.seed}, {"passed", t.passed()}, {"cells", cells}, {"notes", t.notes}});
    }
    doc["results"]["tables"] = tables;
    emit(doc, c.json_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint dependence via the area under the Kendall curve"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--json", c.json_path, "write the JSON report here (default: stdout)");
        s->add_option("--cache", c.cache_path, "calibration cache file (default: $KENDEP_CACHE or ~/.cache)");
        s->add_option("--seed", c.seed, "master seed")->capture_default_str();
    };

    std::string input, columns, family, out, sigma_source = "auto", data_dir = KENDEP_DEFAULT_DATA_DIR;
    double alpha = 0.05, scale = 0.0, tol = -1.0;
    bool all_subsets = false, no_calibrate = false, asymptotic = false, with_phi = false;
    int d = 0;
    std::size_t n = 0, r = 10000, sigma_r = 2000, sigma_n = 5000, phi_n = kPhiDefaultN, phi_N = kPhiDefaultReps,
                grid = kDefaultCurveGrid;
    std::vector<std::size_t> ns;
    std::vector<std::string> ids;

    auto* idx = app.add_subcommand("index", "estimate I and I*");
    idx->add_option("--input", input, "CSV file")->required();
    idx->add_option("--columns", columns, "comma-separated names or 1-based positions");
    idx->add_flag("--all-subsets", all_subsets, "also report every sub-vector of size >= 2");
    idx->add_flag("--no-calibrate", no_calibrate, "fail instead of calibrating a missing phi_d");
    add_common(idx);

    auto* tst = app.add_subcommand("test", "test of total independence");
    tst->add_option("--input", input, "CSV file")->required();
    tst->add_option("--columns", columns, "comma-separated names or 1-based positions");
    tst->add_option("--alpha", alpha, "significance level")->capture_default_str();
    tst->add_option("--sigma-source", sigma_source, "auto, shipped or paper")
        ->check(CLI::IsMember({"auto", "shipped", "paper"}))
        ->capture_default_str();
    tst->add_option("--r", r, "null replicates for small-sample percentiles")->capture_default_str();
    tst->add_flag("--no-calibrate", no_calibrate, "fail instead of running a calibration");
    tst->add_flag("--asymptotic", asymptotic, "always use the normal critical value");
    add_common(tst);

    auto* cal = app.add_subcommand("calibrate", "fill the calibration cache");
    cal->add_option("--d", d, "dimension")->required();
    cal->add_option("--n", ns, "sample sizes for percentile tables");
    cal->add_option("--r", r, "null replicates per percentile table")->capture_default_str();
    cal->add_option("--sigma-r", sigma_r, "replicates for sigma")->capture_default_str();
    cal->add_option("--sigma-n", sigma_n, "sample size for sigma")->capture_default_str();
    cal->add_flag("--phi", with_phi, "also calibrate phi_d");
    cal->add_option("--phi-n", phi_n, "sample size for phi_d")->capture_default_str();
    cal->add_option("--phi-N", phi_N, "replicates per rho for phi_d")->capture_default_str();
    add_common(cal);

    auto* sim = app.add_subcommand("simulate", "draw a sample from a named family");
    sim->add_option("--family", family, "e.g. clayton:theta=2,d=3")->required();
    sim->add_option("--n", n, "sample size")->required();
    sim->add_option("--out", out, "CSV output (default: stdout)");
    add_common(sim);

    auto* kp = app.add_subcommand("kplot", "empirical Kendall curves and class check");
    kp->add_option("--input", input, "CSV file")->required();
    kp->add_option("--columns", columns, "comma-separated names or 1-based positions");
    kp->add_option("--out", out, "long-format curve CSV")->required();
    kp->add_option("--grid", grid, "grid size")->capture_default_str();
    kp->add_option("--tol", tol, "crossing tolerance (default: 95% DKW half-width)");
    add_common(kp);

    auto* rep = app.add_subcommand("reproduce", "rerun a published table");
    rep->add_option("tables", ids, "table ids or 'all'");
    rep->add_option("--scale", scale, "fraction of the published replication count (0 = desk defaults)")
        ->capture_default_str();
    rep->add_option("--out-dir", out, "directory for the table CSVs");
    rep->add_option("--data-dir", data_dir, "directory holding biomarkers.csv")->capture_default_str();
    add_common(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*idx)
            return cmd_index(c, input, columns, all_subsets, no_calibrate);
        if (*tst)
            return cmd_test(c, input, columns, alpha, no_calibrate, asymptotic, sigma_source, r);
        if (*cal)
            return cmd_calibrate(c, d, ns, r, sigma_r, sigma_n, with_phi, phi_n, phi_N);
        if (*sim)
            return cmd_simulate(c, family, n, out);
        if (*kp)
            return cmd_kplot(c, input, columns, out, grid, tol);
        if (*rep)
            return cmd_reproduce(c, ids, scale, out, data_dir);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
