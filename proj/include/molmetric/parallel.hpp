//
// molmetric - Copyright 2026 The molmetric Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLMETRIC_PARALLEL_HPP
#define MOLMETRIC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace molmetric {

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> value{0};
  return value;
}
// Set on pool workers; nested parallel_for calls then run inline.
inline bool& in_worker() {
  thread_local bool value = false;
  return value;
}
}  // namespace detail

// 0 restores the default: MOLMETRIC_THREADS, else hardware concurrency.
inline void set_num_threads(int n) {
  detail::thread_override() = std::max(n, 0);
}

inline int num_threads() {
  if (int n = detail::thread_override(); n > 0) return n;
  if (const char* env = std::getenv("MOLMETRIC_THREADS")) {
    if (int n = std::atoi(env); n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, tasks). Tasks are claimed dynamically; callers
// write results by task index so the output never depends on scheduling.
// The first exception thrown by any task is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t tasks, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = num_threads();
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), tasks);
  if (workers <= 1 || detail::in_worker()) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    const bool outer = detail::in_worker();
    detail::in_worker() = true;
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks;
      }
    }
    detail::in_worker() = outer;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace molmetric

#endif  // MOLMETRIC_PARALLEL_HPP
