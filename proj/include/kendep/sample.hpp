#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace kendep {

// n x d table of observations, row-major.
class Sample {
public:
    Sample() = default;

    Sample(std::size_t n, std::size_t d) : n_(n), d_(d), v_(n * d, 0.0) {}

    Sample(std::size_t n, std::size_t d, std::vector<double> values)
        : n_(n), d_(d), v_(std::move(values)) {
        if (v_.size() != n_ * d_)
            throw shape_error("sample: value count does not match n*d");
    }

    static Sample from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty())
            return Sample{};
        Sample s(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != s.d_)
                throw shape_error("sample: ragged rows");
            for (std::size_t m = 0; m < s.d_; ++m)
                s(i, m) = rows[i][m];
        }
        return s;
    }

    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }

    double& operator()(std::size_t i, std::size_t m) { return v_[i * d_ + m]; }
    double operator()(std::size_t i, std::size_t m) const { return v_[i * d_ + m]; }

    const double* row(std::size_t i) const { return v_.data() + i * d_; }
    const std::vector<double>& values() const { return v_; }

    std::vector<double> column(std::size_t m) const {
        std::vector<double> c(n_);
        for (std::size_t i = 0; i < n_; ++i)
            c[i] = (*this)(i, m);
        return c;
    }

    Sample select(const std::vector<std::size_t>& cols) const {
        Sample s(n_, cols.size());
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] >= d_)
                    throw shape_error("sample: column index out of range");
                s(i, k) = (*this)(i, cols[k]);
            }
        return s;
    }

    // Throws unless n >= 2, d >= 2 and every entry is finite.
    void validate() const {
        if (n_ < 2)
            throw shape_error("sample: need n >= 2, got " + std::to_string(n_));
        if (d_ < 2)
            throw shape_error("sample: need d >= 2, got " + std::to_string(d_));
        for (std::size_t k = 0; k < v_.size(); ++k)
            if (!std::isfinite(v_[k]))
                throw domain_error("sample: non-finite value at row " + std::to_string(k / d_) +
                                   ", column " + std::to_string(k % d_));
    }

    bool operator==(const Sample& o) const { return n_ == o.n_ && d_ == o.d_ && v_ == o.v_; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> v_;
};

} // namespace kendep
