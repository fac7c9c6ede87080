#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace virality {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over chunked index ranges. Chunk boundaries are a pure
// function of (n, threads), so per-chunk outputs can be merged in chunk order
// for deterministic reductions.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  const int t = resolve_threads(threads);
  if (t <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace virality
