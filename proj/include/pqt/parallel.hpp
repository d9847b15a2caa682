#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace pqt {

/// 0 or negative -> hardware concurrency (at least 1).
inline int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(begin, end) over contiguous chunks of [0, n). Results must not
/// depend on the chunking: workers may only write to disjoint per-index
/// slots, so any thread count produces identical output.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    threads = resolve_threads(threads);
    if (n == 0) {
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(begin + chunk, n);
        if (begin >= end) {
            break;
        }
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) {
        t.join();
    }
}

} // namespace pqt
