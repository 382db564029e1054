#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace zenopm {

/// Effective worker count: an explicit request wins, then the ZENOPM_THREADS
/// environment variable, then hardware concurrency.
inline int worker_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ZENOPM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, count).
// Chunk geometry depends only on count and chunk_size, never on the worker
// count, so per-chunk results merged in chunk order are reproducible.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t chunk_size, int workers, Fn&& fn) {
  if (count == 0) return;
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count(workers)), chunks);
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      fn(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
        fn(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace zenopm
