#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace aclab {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
  static std::atomic<int> n{1};
  return n;
}
}  // namespace detail

/// Number of worker threads used by row-parallel kernels (default 1).
inline int thread_count() { return detail::thread_count_slot().load(); }
inline void set_thread_count(int n) { detail::thread_count_slot().store(std::max(1, n)); }

/// Calls fn(row_begin, row_end) over disjoint blocks of [0, rows). Each
/// kernel writes only its own rows, so results do not depend on the split.
template <class Fn>
void parallel_rows(int rows, Fn&& fn) {
  const int workers = std::min(thread_count(), std::max(1, rows / 16));
  if (workers <= 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (rows + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(rows, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
}

/// Pairwise summation with a fixed split; bit-identical for a given input.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace aclab
