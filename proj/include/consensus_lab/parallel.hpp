#pragma once

#include <cstddef>
#include <functional>

namespace consensus_lab {

/// Worker count: CONSENSUS_LAB_THREADS if set and positive, else the
/// hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Calls body(i) for every i in [0, count) on up to `workers` threads.
/// Work is handed out dynamically; callers write results by index so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace consensus_lab
