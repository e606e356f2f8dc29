#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qspec {

/// Runs body(i) for i in [0, count) on `workers` threads. Results must be
/// written to position-addressed storage. If any call throws, the exception
/// from the lowest failing index is rethrown after all workers stop.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body,
                         const std::function<void()>& on_item_done = {}) {
    if (count == 0) return;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    std::size_t err_index = count;
    std::exception_ptr err;

    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                body(i);
                if (on_item_done) on_item_done();
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
                failed.store(true);
            }
        }
    };

    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers < 1 ? 1 : workers), count);
    if (n_threads <= 1) {
        run();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(run);
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace qspec
