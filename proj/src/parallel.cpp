// License: Apache 2.0. See LICENSE file in root directory.

#include "fstack/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace fstack {

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FSTACK_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& fn,
                  int threads) {
  if (n <= 0) return;
  const Eigen::Index workers =
      std::min<Eigen::Index>(thread_count(threads), n);
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (Eigen::Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Eigen::Index i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fstack
