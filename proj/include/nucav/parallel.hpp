#pragma once

#include <cstddef>
#include <functional>

namespace nucav {

// Number of worker threads; NUCAV_THREADS overrides the hardware count.
std::size_t worker_count();

// Calls fn(i) for i in [0, n). Results must be written to index-addressed
// slots, which keeps every reduction independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nucav
