#pragma once

#include <cstddef>
#include <functional>

namespace msq {

// Worker count from MSQ_THREADS (default: hardware concurrency).
int thread_count();

// Calls body(begin, end) on contiguous chunks of [0, n). Each index is
// handled by exactly one chunk, so results never depend on the thread count
// as long as body writes only to its own indices.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace msq
