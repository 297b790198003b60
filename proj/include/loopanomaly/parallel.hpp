#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace la {

// Deterministic block-parallel map-reduce.  The item range is cut into
// fixed-size blocks; workers grab blocks through an atomic counter and write
// each block's partial result into a slot indexed by block number; partials
// are then folded in block order.  The reduction tree is therefore a fixed
// function of (n_items, block_size) and the output is bit-identical for any
// worker count.
//
// map: (block_index, first_item, last_item) -> Partial
// Partial must be default-constructible and support merge(const Partial&).
template <typename Partial, typename Map>
Partial parallel_blocks(std::int64_t n_items, std::int64_t block_size, int workers, Map&& map) {
    if (block_size <= 0) block_size = 1;
    const std::int64_t n_blocks = (n_items + block_size - 1) / block_size;
    std::vector<Partial> partials(static_cast<std::size_t>(n_blocks));

    auto run_block = [&](std::int64_t b) {
        const std::int64_t first = b * block_size;
        const std::int64_t last = std::min(n_items, first + block_size);
        partials[static_cast<std::size_t>(b)] = map(b, first, last);
    };

    if (workers <= 1 || n_blocks <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::int64_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::int64_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                run_block(b);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = workers < static_cast<int>(n_blocks) ? workers : static_cast<int>(n_blocks);
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    Partial total{};
    for (const auto& p : partials) total.merge(p);
    return total;
}

inline constexpr std::int64_t kDefaultBlockSize = 1024;

} // namespace la
