#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct FitError : Error { using Error::Error; };

// Iteration or estimator that failed to settle; the message carries diagnostics.
struct ConvergenceError : Error { using Error::Error; };

// A per-realization failure inside a Monte Carlo average.
struct RealizationError : Error {
    std::size_t index;
    RealizationError(std::size_t idx, const std::string& what)
        : Error("realization " + std::to_string(idx) + ": " + what), index(idx) {}
};

inline constexpr double pi = 3.14159265358979323846;

}  // namespace qdl
