#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace avm {

/// Splits [begin, end) into contiguous chunks and runs `body(lo, hi)` on each,
/// one chunk per hardware thread. Runs inline when only one thread is available.
inline void parallel_for(int begin, int end, const std::function<void(int, int)>& body) {
  const int count = end - begin;
  if (count <= 0) return;
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, count);
  if (workers == 1) {
    body(begin, end);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int lo = begin; lo < end; lo += chunk) {
    const int hi = std::min(end, lo + chunk);
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
}

}  // namespace avm
