#pragma once

// Deterministic block-parallel helpers. Work is split into a fixed block
// grid; per-block partials are reduced in block order, so the result is
// independent of the number of worker threads. Thread count is
// min(hardware, CONFIG_COUNT_THREADS) and at least 1.

#include <cstddef>
#include <functional>
#include <vector>

namespace confcount::par {

unsigned thread_count();

// Runs body(block) for block = 0..n_blocks-1, possibly concurrently.
// Blocks must write only to disjoint state.
void for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body);

// Sum of body(block) over all blocks, reduced in ascending block order.
double sum_blocks(std::size_t n_blocks, const std::function<double(std::size_t)>& body);

}  // namespace confcount::par
