#pragma once

// Shared error taxonomy and small helpers used across the library.
//
// The CLI maps these onto exit codes: validation_error -> 2,
// numeric_error -> 3, io_error -> 4.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shiftlab {

inline constexpr std::string_view kVersion = "0.1.0";

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments, malformed configs, violated preconditions.
struct validation_error : error {
    using error::error;
};

// Singular systems, divergent optimizers, non-finite results.
struct numeric_error : error {
    using error::error;
};

// Missing files, unwritable directories, parse failures.
struct io_error : error {
    using error::error;
};

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw validation_error(msg);
}

}  // namespace shiftlab
