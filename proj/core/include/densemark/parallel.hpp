#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace densemark {

/// Static-partition parallel loop: item ranges are fixed by (count, threads)
/// alone, so any per-chunk accumulation combined in chunk order is
/// deterministic regardless of scheduling.
template <typename Fn>
void parallel_chunks(int count, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    threads = std::min(threads, std::max(1, count));
    if (threads == 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int per = (count + threads - 1) / threads;
    for (int c = 0; c < threads; ++c) {
        int begin = c * per;
        int end = std::min(count, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    }
    for (auto& th : pool) th.join();
}

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace densemark
