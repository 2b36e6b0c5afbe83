#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ctrb {

// Run fn(index) for index in [0, count) across the given number of
// workers. Tasks own disjoint output slots, so results are independent
// of the worker count.
inline void parallel_for_index(std::size_t count, int workers,
                               const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const auto nthreads =
      static_cast<std::size_t>(workers) < count
          ? static_cast<std::size_t>(workers)
          : count;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([t, nthreads, count, &fn]() {
      for (std::size_t i = t; i < count; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ctrb
