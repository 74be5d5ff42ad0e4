#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wellrom {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Items are handed
/// out dynamically; the first exception thrown is rethrown after all threads
/// join. Results must be written to per-index slots to stay deterministic.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
    if (nthreads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::min(nthreads, n) - 1);
    for (std::size_t t = 1; t < std::min(nthreads, n); ++t)
        pool.emplace_back(body);
    body();
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace wellrom
