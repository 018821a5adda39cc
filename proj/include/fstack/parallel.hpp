// License: Apache 2.0. See LICENSE file in root directory.

#pragma once

#include <Eigen/Core>

#include <functional>

namespace fstack {

/// Effective worker count: `requested` if > 0, else the FSTACK_THREADS
/// environment variable, else hardware concurrency.
int thread_count(int requested = 0);

/// Runs fn(i) for i in [0, n) on a static partition of worker threads.
/// Each index must write only its own output slot, so results never
/// depend on the number of workers.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& fn,
                  int threads = 0);

}  // namespace fstack
