#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace meshstego {

// Splits [0, n) into contiguous chunks, one worker thread per chunk. Each
// index is processed exactly once and results land in caller-owned slots, so
// output is identical for any thread count.
template <typename Fn>
inline void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, w, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i, int(w));
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

} // namespace meshstego
