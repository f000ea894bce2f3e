#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace biwave {

/// Worker count: BIWAVE_THREADS if set and positive, else the hardware concurrency.
inline int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    hw = std::max(hw, 1);
    if (const char* env = std::getenv("BIWAVE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) {
            return std::min(cap, hw);
        }
    }
    return hw;
}

/// Calls body(i) for i in [begin, end) on up to worker_count() threads in
/// contiguous blocks. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(int begin, int end, Body&& body) {
    const int count = end - begin;
    const int workers = std::min(worker_count(), std::max(count / 64, 1));
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) {
            body(i);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / workers);
        const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
        threads.emplace_back([&, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) {
                    body(i);
                }
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace biwave
