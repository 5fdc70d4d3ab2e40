#pragma once

#include <cstddef>
#include <functional>

namespace a2p {

/// Worker count: hardware concurrency, capped by the A2P_THREADS environment variable.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. If any call throws,
/// the exception from the lowest index is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace a2p
