#pragma once

#include <stdexcept>
#include <string>

namespace ecgunc {

/// Bad shapes, dimensions, or structurally invalid arguments.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or usage (maps to CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure: NaN loss, invalid probability rows, broken identities (exit code 3).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File problems: missing, truncated, bad magic (exit code 4).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ecgunc
