#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cfmimo {

/// Worker count: CFMIMO_THREADS when set, otherwise the hardware count.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CFMIMO_THREADS")) {
        try {
            n = std::stoi(env);
        } catch (const std::exception&) {
        }
    }
    return std::max(n, 1);
}

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
template <typename Fn> void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace cfmimo
