/// \file parallel.hpp
/// Minimal deterministic work sharing.  parallel_for splits an index range
/// into contiguous blocks over std::thread workers; results must be written
/// to per-index slots so the outcome is identical for any worker count.
/// HARDY_NLS_THREADS caps the workers (1 disables threading entirely).

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hardynls {

inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HARDY_NLS_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

/// Runs f(i) for i in [0, n).  The partition is static and contiguous; any
/// exception from a worker is rethrown (first one wins) after all join.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned workers =
      unsigned(std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1)));
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace hardynls
