#pragma once

#include <stdexcept>
#include <string>

namespace kendep {

// Argument outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Bad configuration: unsupported dimension, missing calibration, etc.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Statistic undefined for the given data (e.g. constant column).
struct statistic_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace kendep
