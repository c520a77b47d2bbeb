#pragma once

// Deterministic helper for data-parallel loops: items are partitioned into
// contiguous blocks, each item writes only its own output slot, so results are
// identical for every thread count. Exceptions are captured and rethrown.

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gpsinfer {

inline void parallel_for(std::size_t n_items, int nthread,
                         const std::function<void(std::size_t)>& fn) {
  if (nthread < 1) nthread = 1;
  const auto workers = static_cast<std::size_t>(nthread);
  if (workers <= 1 || n_items <= 1) {
    for (std::size_t i = 0; i < n_items; ++i) fn(i);
    return;
  }
  const std::size_t used = std::min(workers, n_items);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(used);
  for (std::size_t t = 0; t < used; ++t) {
    threads.emplace_back([&, t]() {
      const std::size_t lo = n_items * t / used;
      const std::size_t hi = n_items * (t + 1) / used;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gpsinfer
