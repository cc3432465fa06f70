#pragma once

#include <cmath>
#include <vector>

#include "common.hpp"

namespace qdl {

// n points from a to b inclusive.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n < 2) throw DomainError("linspace needs >= 2 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = b;
    return g;
}

// n interior points of (a, b) with equal spacing (b - a)/(n + 1).
inline std::vector<double> open_grid(double a, double b, std::size_t n) {
    if (n < 1) throw DomainError("open grid needs >= 1 point");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    return g;
}

// n log-spaced points from a to b inclusive, a > 0.
inline std::vector<double> logspace(double a, double b, std::size_t n) {
    if (!(a > 0 && b > a)) throw DomainError("logspace needs 0 < a < b");
    auto e = linspace(std::log(a), std::log(b), n);
    for (auto& x : e) x = std::exp(x);
    e.front() = a;
    e.back() = b;
    return e;
}

}  // namespace qdl
