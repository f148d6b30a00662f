#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace oslab {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Run fn(i) for i in [0, n). Each index must write only its own slot of any
// shared output, which keeps results identical to the serial order. The
// first exception thrown by a worker is rethrown after all threads join.
template <class Fn>
void parallel_for(long n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr firstError;
    std::mutex errorMutex;
    const int nThreads = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nThreads));
    for (int t = 0; t < nThreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                long i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(errorMutex);
                    if (!firstError) firstError = std::current_exception();
                    next.store(n, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (firstError) std::rethrow_exception(firstError);
}

} // namespace oslab
