// Index-parallel loops whose results do not depend on the worker count.
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace masslab {

/// Process-wide worker count used by the experiments (default 1).
int worker_count();
void set_worker_count(int n);

/// Calls body(i) for i in [0, n). Each index is handled by exactly one worker and
/// callers write results into per-index slots, so output is schedule independent.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, int workers = worker_count()) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += w) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace masslab
