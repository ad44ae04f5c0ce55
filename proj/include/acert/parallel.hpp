#pragma once

// Deterministic fork-join over an index range. Work items write to
// disjoint slots, so results never depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace acert {

inline unsigned default_workers()
{
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Calls fn(i) for every i in [0, n). Items are handed out dynamically; the
/// first exception (lowest index among those observed) is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn)
{
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mu;
    std::exception_ptr err;
    std::size_t err_index = n;
    auto body = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed))
                return;
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
                failed = true;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (unsigned w = 1; w < workers; ++w)
            pool.emplace_back(body);
        body();
    }
    if (err)
        std::rethrow_exception(err);
}

} // namespace acert
