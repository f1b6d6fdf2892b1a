#pragma once

#include <stdexcept>
#include <string>

namespace traject {

/// Malformed or inconsistent input data (bad dataset line, misaligned
/// timestamps, missing labels). Maps to CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure during training or evaluation (NaN loss, divergence).
/// Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace traject
