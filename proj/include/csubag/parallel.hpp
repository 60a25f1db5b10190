#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace csubag {

/// Number of workers when the caller passes 0: CONTRAST_SUBAG_THREADS if set,
/// otherwise the hardware concurrency.
std::size_t default_threads();

/// Runs body(i) for i in [0, count) on a bounded pool of `threads` workers.
/// Each task must write only to its own output slot; the first exception
/// thrown by any task is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    if (threads == 0) threads = default_threads();
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::jthread> pool;
    const std::size_t used = threads < count ? threads : count;
    pool.reserve(used);
    for (std::size_t t = 0; t < used; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace csubag
