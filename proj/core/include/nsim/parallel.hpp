#pragma once

#include <cstddef>
#include <functional>

namespace nsim {

// Worker cap from NSIM_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

// Runs fn(0..n-1) on up to worker_count() threads. Tasks must write to
// disjoint state; results may not depend on execution order. The first
// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nsim
