#ifndef LWEAK_PARALLEL_HPP_
#define LWEAK_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lweak {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls `body(i)` for every i in [0, count), spread over `workers` threads
/// in contiguous chunks. `body` must only write to slots owned by index i;
/// callers then reduce in index order, so results never depend on
/// scheduling. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body &&body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t n_threads = std::min<std::size_t>(workers, count);
  const std::size_t chunk = (count + n_threads - 1) / n_threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto &th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lweak

#endif  // LWEAK_PARALLEL_HPP_
