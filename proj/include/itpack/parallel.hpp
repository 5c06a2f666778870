#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace itpack {

/// Runs fn(i) for i in [0, count). With workers > 1 the range is split into
/// contiguous chunks, one thread each. Each index must touch only its own
/// output slot; under that contract results are identical for any worker
/// count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    if (count == 0) return;
    const auto nthreads =
        static_cast<std::size_t>(std::max(1, workers)) > count
            ? count
            : static_cast<std::size_t>(std::max(1, workers));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (count + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace itpack
