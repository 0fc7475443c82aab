#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dissim {

/// Number of worker threads batch runs may use: the DISSIM_THREADS
/// environment variable when it holds a positive integer, otherwise the
/// hardware concurrency (and at least one).
inline int thread_budget() {
  if (const char* raw = std::getenv("DISSIM_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(raw, &end, 10);
    if (end != raw && *end == '\0' && parsed >= 1) {
      return static_cast<int>(std::min(parsed, 256L));
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(first, last) over a partition of [0, total) using at most
/// thread_budget() workers. fn must tolerate concurrent invocation on
/// disjoint ranges and must not throw; callers keep results deterministic by
/// writing to per-index slots and reducing in index order afterwards.
inline void parallel_for_ranges(long total, const std::function<void(long, long)>& fn) {
  if (total <= 0) {
    return;
  }
  const long workers = std::min<long>(thread_budget(), total);
  if (workers <= 1) {
    fn(0, total);
    return;
  }
  const long chunk = (total + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    const long first = w * chunk;
    const long last = std::min(total, first + chunk);
    if (first >= last) {
      break;
    }
    pool.emplace_back(fn, first, last);
  }
  for (std::thread& worker : pool) {
    worker.join();
  }
}

}  // namespace dissim
