#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace neurite {

// Runs fn(i) for i in [0, n). Work items are claimed atomically; callers must
// make fn(i) write only to slot i of its output so the result does not depend
// on the thread count or schedule.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& fn) {
  if (n <= 0) return;
  threads = std::max(1, threads);
  if (threads == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nw = static_cast<int>(std::min<std::int64_t>(threads, n));
  pool.reserve(static_cast<std::size_t>(nw));
  for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// Deterministic chunked reduction: splits [0, n) into fixed-size chunks
// (independent of the thread count), evaluates chunk sums in parallel and
// folds them in chunk order, so the result is bitwise reproducible.
template <class Acc, class ChunkFn>
Acc parallel_chunk_sum(std::int64_t n, int threads, std::int64_t chunk_size,
                       Acc zero, ChunkFn&& chunk_fn) {
  if (n <= 0) return zero;
  const std::int64_t nchunks = (n + chunk_size - 1) / chunk_size;
  std::vector<Acc> partial(static_cast<std::size_t>(nchunks), zero);
  parallel_for(nchunks, threads, [&](std::int64_t c) {
    const std::int64_t lo = c * chunk_size;
    const std::int64_t hi = std::min(n, lo + chunk_size);
    partial[static_cast<std::size_t>(c)] = chunk_fn(lo, hi);
  });
  Acc total = zero;
  for (const Acc& p : partial) total += p;
  return total;
}

}  // namespace neurite
