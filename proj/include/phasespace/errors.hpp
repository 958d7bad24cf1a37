#pragma once

#include <stdexcept>
#include <string>

namespace phasespace {

/// Invalid grid/state/run configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at run time (guard violation, invalid state). CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File I/O failure. CLI exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace phasespace
