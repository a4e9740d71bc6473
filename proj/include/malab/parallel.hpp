#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace malab {

// Process-wide worker count used by parallel_for. Defaults to 1 so that
// library calls are deterministic unless the caller opts in to threading.
void set_threads(int n);
int threads();

// Chunked parallel map over [0, count). The body must only write to
// disjoint, index-owned state; reductions should accumulate per-chunk and
// merge afterwards (integer merges keep results thread-count independent).
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int nt = threads();
    if (nt <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(nt), count);
    std::atomic<std::size_t> next{0};
    const std::size_t chunk =
        std::max<std::size_t>(1, count / (workers * 8));
    auto run = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

}  // namespace malab
