#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace qdl {

// Worker count from QDLAB_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("QDLAB_WORKERS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads, strided assignment.
// If any call throws, the exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> error_index(workers, n);
    auto body = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
                error_index[w] = i;
                return;
            }
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body, w);
        body(0);
        for (auto& t : pool) t.join();
    }
    std::size_t best = n;
    std::exception_ptr first;
    for (unsigned w = 0; w < workers; ++w)
        if (errors[w] && error_index[w] < best) {
            best = error_index[w];
            first = errors[w];
        }
    if (first) std::rethrow_exception(first);
}

// Deterministic pairwise (tree) summation.
template <class T>
T pairwise_sum(std::span<const T> x) {
    if (x.empty()) return T{};
    if (x.size() <= 8) {
        T s = x[0];
        for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
        return s;
    }
    std::size_t h = x.size() / 2;
    return pairwise_sum(x.subspan(0, h)) + pairwise_sum(x.subspan(h));
}

template <class T>
T pairwise_sum(const std::vector<T>& x) {
    return pairwise_sum(std::span<const T>(x.data(), x.size()));
}

// Parallel map into a vector, then pairwise reduction in index order.
template <class T, class Fn>
T parallel_sum(std::size_t n, unsigned workers, Fn&& fn) {
    std::vector<T> parts(n);
    parallel_for(n, workers, [&](std::size_t i) { parts[i] = fn(i); });
    return pairwise_sum(parts);
}

}  // namespace qdl
