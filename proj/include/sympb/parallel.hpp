#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sympb {

/// Worker count: an explicit positive request wins, then the SYMPB_THREADS
/// environment variable, then the hardware concurrency.
inline int worker_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SYMPB_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls f(i) for i in [0, n) on up to `threads` workers. Work is handed out
/// by index, so results written to slot i are independent of scheduling.
/// The first exception thrown by any call is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        f(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace sympb
