#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace overlinkd {

/// Worker count: `requested` (0 means hardware concurrency), capped by the
/// OVERLINKD_THREADS environment variable when it holds a positive integer.
inline std::size_t worker_count(std::size_t requested = 0)
{
    std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("OVERLINKD_THREADS")) {
        try {
            long cap = std::stol(env);
            if (cap > 0) {
                n = std::min(n, static_cast<std::size_t>(cap));
            }
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, n);
}

/// Runs f(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& f)
{
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w + 1 < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace overlinkd
