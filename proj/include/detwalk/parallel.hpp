#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace detwalk {

/// Number of worker threads. Reads DETWALK_THREADS once; falls back to the
/// hardware concurrency when unset, and to 1 when that is unknown.
inline int worker_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("DETWALK_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) return static_cast<int>(std::min(v, 256L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return cached;
}

/// Runs fn(begin, end) over a static contiguous partition of [0, n).
/// Each index belongs to exactly one chunk, so results are independent of the
/// schedule as long as chunks write disjoint outputs.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  threads = static_cast<int>(std::clamp<std::int64_t>(threads, 1, n));
  if (threads == 1) {
    fn(0, n);
    return;
  }
  const std::int64_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) {
    const std::int64_t b = t * chunk;
    const std::int64_t e = std::min<std::int64_t>(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back(fn, b, e);
  }
  fn(0, std::min<std::int64_t>(n, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace detwalk
