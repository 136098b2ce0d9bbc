#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "errors.hpp"
#include "independence.hpp"
#include "standardize.hpp"

namespace kendep {

using json = nlohmann::json;

inline constexpr int kCacheVersion = 1;
inline constexpr const char* kCacheFormat = "kendep-calibration-cache";

inline json phi_to_json(const StandardizerPhi& p) {
    json j;
    j["d"] = p.d;
    j["coefficients"] = p.coef;
    if (p.provenance.builtin) {
        j["source"] = "builtin";
    } else {
        j["source"] = "calibrated";
        j["seed"] = p.provenance.seed;
        j["n"] = p.provenance.n;
        j["N"] = p.provenance.N;
        j["rho"] = p.provenance.grid.rho;
        j["I_of_rho"] = p.provenance.grid.I_of_rho;
    }
    return j;
}

inline StandardizerPhi phi_from_json(const json& j) {
    StandardizerPhi p;
    p.d = j.at("d").get<int>();
    p.coef = j.at("coefficients").get<std::array<double, kPhiDegree + 1>>();
    p.provenance.builtin = j.at("source").get<std::string>() == "builtin";
    if (!p.provenance.builtin) {
        p.provenance.seed = j.at("seed").get<std::uint64_t>();
        p.provenance.n = j.at("n").get<std::size_t>();
        p.provenance.N = j.at("N").get<std::size_t>();
        p.provenance.grid.rho = j.at("rho").get<std::vector<double>>();
        p.provenance.grid.I_of_rho = j.at("I_of_rho").get<std::vector<double>>();
        p.provenance.grid.n = p.provenance.n;
        p.provenance.grid.N = p.provenance.N;
        p.provenance.grid.seed = p.provenance.seed;
    }
    return p;
}

inline json sigma_to_json(const SigmaPi& s) {
    json j{{"d", s.d}, {"value", s.value}, {"source", sigma_source_name(s.source)}};
    if (s.source == SigmaSource::monte_carlo || s.source == SigmaSource::shipped_table) {
        j["r"] = s.r;
        j["n"] = s.n;
        j["seed"] = s.seed;
    }
    return j;
}

inline SigmaPi sigma_from_json(const json& j) {
    SigmaPi s;
    s.d = j.at("d").get<int>();
    s.value = j.at("value").get<double>();
    const auto src = j.at("source").get<std::string>();
    for (auto c : {SigmaSource::exact_d2, SigmaSource::quadrature_d2, SigmaSource::shipped_table,
                   SigmaSource::paper_table, SigmaSource::monte_carlo})
        if (src == sigma_source_name(c))
            s.source = c;
    s.r = j.value("r", std::size_t{0});
    s.n = j.value("n", std::size_t{0});
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
}

inline json table_to_json(const CalibrationTable& t) {
    return json{{"d", t.d},           {"n", t.n},         {"r", t.r},
                {"seed", t.seed},     {"sigma", t.sigma}, {"levels", t.levels},
                {"percentiles", t.percentiles}};
}

inline CalibrationTable table_from_json(const json& j) {
    CalibrationTable t;
    t.d = j.at("d").get<int>();
    t.n = j.at("n").get<std::size_t>();
    t.r = j.at("r").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.sigma = j.at("sigma").get<double>();
    t.levels = j.at("levels").get<std::vector<double>>();
    t.percentiles = j.at("percentiles").get<std::vector<double>>();
    return t;
}

inline std::string default_cache_path() {
    if (const char* env = std::getenv("KENDEP_CACHE"); env && *env)
        return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
        return std::string(xdg) + "/kendep/calibration.json";
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::string(home) + "/.cache/kendep/calibration.json";
    return "kendep-calibration.json";
}

// One versioned JSON file holding per-dimension phi, sigma and percentile
// tables.
class CalibrationCache {
public:
    CalibrationCache() { doc_ = empty(); }

    static CalibrationCache load(const std::string& path) {
        CalibrationCache c;
        std::ifstream in(path);
        if (!in)
            return c;
        try {
            in >> c.doc_;
        } catch (const json::exception& e) {
            throw io_error("calibration cache '" + path + "' is not valid JSON: " + e.what());
        }
        if (c.doc_.value("format", "") != kCacheFormat)
            throw io_error("calibration cache '" + path + "' has an unknown format");
        if (c.doc_.value("version", 0) != kCacheVersion)
            throw io_error("calibration cache '" + path + "' has unsupported version " +
                           std::to_string(c.doc_.value("version", 0)));
        return c;
    }

    // Write to a temporary sibling, then rename over the target.
    void save(const std::string& path) const {
        namespace fs = std::filesystem;
        const fs::path target(path);
        std::error_code ec;
        if (target.has_parent_path())
            fs::create_directories(target.parent_path(), ec);
        const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
        {
            std::ofstream out(tmp);
            if (!out)
                throw io_error("cannot write calibration cache '" + tmp.string() + "'");
            out << doc_.dump(2) << '\n';
            if (!out)
                throw io_error("failed writing calibration cache '" + tmp.string() + "'");
        }
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp, ec);
            throw io_error("cannot move calibration cache into place at '" + path + "'");
        }
    }

    std::optional<StandardizerPhi> phi(int d) const {
        const json* e = entry(d);
        if (!e || !e->contains("phi"))
            return std::nullopt;
        return phi_from_json(e->at("phi"));
    }
    void put_phi(const StandardizerPhi& p) { slot(p.d)["phi"] = phi_to_json(p); }

    std::optional<SigmaPi> sigma(int d) const {
        const json* e = entry(d);
        if (!e || !e->contains("sigma"))
            return std::nullopt;
        return sigma_from_json(e->at("sigma"));
    }
    void put_sigma(const SigmaPi& s) { slot(s.d)["sigma"] = sigma_to_json(s); }

    std::optional<CalibrationTable> percentiles(int d, std::size_t n) const {
        const json* e = entry(d);
        if (!e || !e->contains("percentiles"))
            return std::nullopt;
        const auto& p = e->at("percentiles");
        const std::string key = "n=" + std::to_string(n);
        if (!p.contains(key))
            return std::nullopt;
        return table_from_json(p.at(key));
    }
    void put_percentiles(const CalibrationTable& t) {
        slot(t.d)["percentiles"]["n=" + std::to_string(t.n)] = table_to_json(t);
    }

    const json& document() const { return doc_; }

private:
    static json empty() {
        return json{{"format", kCacheFormat}, {"version", kCacheVersion}, {"entries", json::object()}};
    }
    static std::string key(int d) { return "d=" + std::to_string(d); }

    const json* entry(int d) const {
        const auto& e = doc_.at("entries");
        auto it = e.find(key(d));
        return it == e.end() ? nullptr : &*it;
    }
    json& slot(int d) { return doc_["entries"][key(d)]; }

    json doc_;
};

} // namespace kendep
