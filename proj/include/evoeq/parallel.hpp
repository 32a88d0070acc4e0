#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "evoeq/linop.hpp"

namespace evoeq {

/// Resolve a worker count: explicit value wins, then EVOEQ_WORKERS, then 1.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EVOEQ_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

/// Statically chunked parallel loop. Each index is processed exactly once and
/// results must be written to per-index slots, so the output is independent
/// of the worker count.
inline void parallel_for(Index n, int workers,
                         const std::function<void(Index)>& body) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  const int used = static_cast<int>(std::min<Index>(workers, n));
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  threads.reserve(static_cast<std::size_t>(used));
  for (int t = 0; t < used; ++t) {
    const Index begin = n * t / used;
    const Index end = n * (t + 1) / used;
    threads.emplace_back([&, begin, end]() {
      try {
        for (Index i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& thread : threads) thread.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace evoeq
