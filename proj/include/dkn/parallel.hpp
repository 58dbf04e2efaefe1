#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace dkn {

/// Run fn(begin, end) over fixed-size chunks of [0, total). Chunk boundaries
/// do not depend on the thread count, so workers writing disjoint per-index
/// slots produce identical output for any level of parallelism.
inline void parallel_chunks(long total, long chunk, int threads,
                            const std::function<void(long, long)>& fn) {
    if (total <= 0) return;
    const long num_chunks = (total + chunk - 1) / chunk;
    int workers = threads;
    if (workers > num_chunks) workers = static_cast<int>(num_chunks);
    if (workers <= 1) {
        for (long c = 0; c < num_chunks; ++c)
            fn(c * chunk, std::min(total, (c + 1) * chunk));
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                long c = next.fetch_add(1);
                if (c >= num_chunks) return;
                fn(c * chunk, std::min(total, (c + 1) * chunk));
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dkn
