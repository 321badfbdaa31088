#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace spiralflow {

/// Run fn(begin, end) over contiguous chunks of [0, n). Each index is visited by
/// exactly one thread, so writes to per-index slots need no synchronization.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    std::size_t nt = std::size_t(std::max(1, threads));
    if (nt == 1 || n < 2048) {
        fn(std::size_t(0), n);
        return;
    }
    nt = std::min(nt, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

} // namespace spiralflow
