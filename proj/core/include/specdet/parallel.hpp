#pragma once

#include <cstddef>
#include <functional>

namespace specdet {

/// Worker count: hardware concurrency, capped by the SPECDET_THREADS environment variable.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Iterations must be independent.
/// The first exception thrown by any iteration is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace specdet
