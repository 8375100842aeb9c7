// parallel.hpp — static-partition parallel loop over an index range
#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace ensctl {

inline int resolve_thread_count(int threads) {
    if (threads > 0) return threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, n). Each index must write only its own slots, so
// results are identical for any worker count. The first exception thrown by a
// worker is rethrown on the calling thread.
inline void parallel_for(Eigen::Index n, int threads,
                         const std::function<void(Eigen::Index)>& body) {
    const int workers = std::min<Eigen::Index>(resolve_thread_count(threads), n);
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) body(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const Eigen::Index lo = n * w / workers;
            const Eigen::Index hi = n * (w + 1) / workers;
            try {
                for (Eigen::Index i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ensctl
