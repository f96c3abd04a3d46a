// parallel.hpp
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace eib {

/// Worker count: explicit request, else EIB_THREADS, else 1.
inline std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("EIB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return 1;
}

/// Evaluates fn(0..n-1) on `threads` workers. Results are stored by index, so
/// the output never depends on scheduling. The first exception (by index) is
/// rethrown after all workers join.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace eib
