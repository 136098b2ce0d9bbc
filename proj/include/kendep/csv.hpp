#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "sample.hpp"

namespace kendep {

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r\"");
    const auto b = s.find_last_not_of(" \t\r\"");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

struct CsvTable {
    std::vector<std::string> header; // column names ("V1", ... when the file has none)
    Sample sample;
};

// Reads a numeric CSV. The first line is taken as a header when any of its
// cells is not a number. `columns` picks columns by header name or by 1-based
// position.
inline CsvTable read_csv(std::istream& in, const std::vector<std::string>& columns = {}) {
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    std::size_t lineno = 0, width = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (trim(line).empty())
            continue;
        auto cells = split_csv_line(line);
        if (first) {
            first = false;
            width = cells.size();
            bool numeric = true;
            for (const auto& c : cells)
                if (!parse_double(c))
                    numeric = false;
            if (!numeric) {
                for (const auto& c : cells)
                    header.push_back(trim(c));
                continue;
            }
        }
        if (cells.size() != width)
            throw parse_error("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                              " cells, found " + std::to_string(cells.size()));
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            auto v = parse_double(cells[c]);
            const std::string col = header.empty() ? std::to_string(c + 1) : "'" + header[c] + "'";
            if (!v)
                throw parse_error("line " + std::to_string(lineno) + ", column " + col + ": " +
                                  (trim(cells[c]).empty() ? "missing value" : "not a number: '" + trim(cells[c]) + "'"));
            if (!std::isfinite(*v))
                throw parse_error("line " + std::to_string(lineno) + ", column " + col + ": non-finite value");
            row[c] = *v;
        }
        rows.push_back(std::move(row));
    }
    if (header.empty())
        for (std::size_t c = 0; c < width; ++c)
            header.push_back("V" + std::to_string(c + 1));

    std::vector<std::size_t> pick;
    if (columns.empty()) {
        for (std::size_t c = 0; c < width; ++c)
            pick.push_back(c);
    } else {
        for (const auto& name : columns) {
            std::size_t found = width;
            for (std::size_t c = 0; c < width; ++c)
                if (header[c] == name)
                    found = c;
            if (found == width) {
                auto pos = parse_double(name);
                if (pos && *pos >= 1 && *pos <= static_cast<double>(width) && *pos == std::floor(*pos))
                    found = static_cast<std::size_t>(*pos) - 1;
            }
            if (found == width)
                throw shape_error("unknown column '" + name + "'");
            pick.push_back(found);
        }
    }
    CsvTable t;
    for (auto c : pick)
        t.header.push_back(header[c]);
    t.sample = Sample(rows.size(), pick.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < pick.size(); ++k)
            t.sample(i, k) = rows[i][pick[k]];
    if (t.sample.n() < 2 || t.sample.d() < 2)
        throw shape_error("need at least 2 rows and 2 columns, got n = " + std::to_string(t.sample.n()) +
                          ", d = " + std::to_string(t.sample.d()));
    return t;
}

inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& columns = {}) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    try {
        return read_csv(in, columns);
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

inline void write_csv(std::ostream& out, const Sample& s, const std::vector<std::string>& header = {}) {
    if (!header.empty()) {
        for (std::size_t m = 0; m < header.size(); ++m)
            out << (m ? "," : "") << header[m];
        out << '\n';
    }
    for (std::size_t i = 0; i < s.n(); ++i) {
        for (std::size_t m = 0; m < s.d(); ++m)
            out << (m ? "," : "") << format_double(s(i, m));
        out << '\n';
    }
}

} // namespace kendep
