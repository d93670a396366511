#pragma once

#include "ensc/core.hpp"

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ensc {

/// Worker count: explicit value, else ENSC_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ENSC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs f(i) for i in [0, n) across `threads` workers with static chunking.
/// Each index is processed exactly once, so writes to per-index slots are
/// deterministic regardless of the worker count. The first exception thrown
/// by any worker is rethrown on the caller.
template <class F>
void parallel_for(Index n, unsigned threads, F&& f) {
    if (n <= 0) return;
    threads = resolve_threads(threads);
    if (threads <= 1 || n == 1) {
        for (Index i = 0; i < n; ++i) f(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<Index>(static_cast<Index>(threads), n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            const Index lo = n * static_cast<Index>(w) / static_cast<Index>(workers);
            const Index hi = n * static_cast<Index>(w + 1) / static_cast<Index>(workers);
            try {
                for (Index i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ensc
