#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace tipdiv {

/// Worker count from TIPDIV_WORKERS (default: hardware concurrency). A value set
/// through `set_worker_count` takes precedence; 0 restores the environment default.
int worker_count();
void set_worker_count(int workers);

/// Runs fn(i) for i in [0, count) over contiguous blocks, one block per worker.
/// Each index is processed by exactly one call, so results never depend on the
/// number of workers as long as fn(i) writes only its own outputs.
template <class Fn>
void parallel_for(std::ptrdiff_t count, Fn&& fn) {
  const auto workers = static_cast<std::ptrdiff_t>(std::max(1, worker_count()));
  if (workers == 1 || count < 2) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::ptrdiff_t blocks = std::min(workers, count);
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(blocks));
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::ptrdiff_t lo = count * b / blocks;
    const std::ptrdiff_t hi = count * (b + 1) / blocks;
    pool.emplace_back([lo, hi, &fn] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace tipdiv
