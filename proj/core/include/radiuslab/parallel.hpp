// radius-lab: deterministic parallel map over independent work items
#pragma once

#include <cstddef>
#include <functional>

namespace radiuslab {

/// Worker count: hardware concurrency capped by the RADIUS_LAB_THREADS
/// environment variable (>=1).
int worker_count();

/// Runs fn(i) for i in [0, n). Each item writes only its own output slot, so
/// results are identical to the serial order regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace radiuslab
