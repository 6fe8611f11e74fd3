#pragma once

#include <cstddef>
#include <functional>

namespace iovpr {

/// Worker cap: IOVPR_THREADS if set and positive, otherwise hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n) over up to worker_count() threads. Each index is
/// visited exactly once; callers write results into per-index slots so output
/// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace iovpr
