#ifndef TRAPPING_PARALLEL_HPP
#define TRAPPING_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace trapping {

/// Worker count for `threads` (0 = hardware concurrency), never more than `jobs`.
inline std::size_t resolve_threads(std::size_t threads, std::size_t jobs) {
  std::size_t t = threads == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : threads;
  return std::max<std::size_t>(1, std::min(t, jobs));
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// runs exactly once; the first exception thrown is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  const std::size_t workers = resolve_threads(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace trapping

#endif  // TRAPPING_PARALLEL_HPP
