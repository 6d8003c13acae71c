#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace semibound {

/// Worker count: SEMIBOUND_THREADS if set to a positive integer, else hardware concurrency.
inline unsigned thread_limit() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SEMIBOUND_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
        } catch (const std::exception&) {
        }
    }
    return hw;
}

/// Runs body(i) for i in [0, n). Each index is handled exactly once, so results
/// written to slot i are independent of scheduling. The first exception (lowest
/// index) is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned max_threads = 0) {
    const unsigned limit = max_threads ? max_threads : thread_limit();
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(limit, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace semibound
