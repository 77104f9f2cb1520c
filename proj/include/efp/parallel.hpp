#pragma once

// Minimal data-parallel loop. Work is split into contiguous chunks; results
// must not depend on the partition, so callers give each index its own
// output slot and its own RNG stream.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace efp {

inline unsigned& max_threads_ref() {
    static unsigned value = std::max(1u, std::thread::hardware_concurrency());
    return value;
}

inline void set_max_threads(unsigned n) { max_threads_ref() = std::max(1u, n); }
inline unsigned max_threads() { return max_threads_ref(); }

// Runs fn(begin, end) over a partition of [0, n). The first exception (from
// the lowest chunk) is rethrown after all workers join.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(max_threads(), std::max<std::size_t>(n, 1)));
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace efp
