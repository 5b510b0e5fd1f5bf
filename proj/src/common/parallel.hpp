#pragma once

#include <cstddef>
#include <functional>

namespace poselift {

// Worker cap: POSELIFT_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads using contiguous
// static chunks. Callers write results into per-index slots, so output never
// depends on scheduling. The exception of the lowest failing chunk is
// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace poselift
