#pragma once

#include "geoheat/common.hpp"

#include <cstddef>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace geoheat {

namespace detail {
inline int& thread_budget() {
  static int budget = 0;  // 0 = use hardware concurrency
  return budget;
}
}  // namespace detail

/// Set the global thread budget consumed by every parallel phase.
/// 1 forces sequential execution. 0 restores the hardware default.
/// Results are bitwise identical for any value; it only splits work.
inline void set_thread_count(int threads) { detail::thread_budget() = threads < 0 ? 0 : threads; }

inline int thread_count() {
  int budget = detail::thread_budget();
  if (budget > 0) return budget;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Static-schedule parallel loop over [begin, end). The body must write only
/// to slots owned by its own index.
template <class Fn>
void parallel_for(Index begin, Index end, Fn&& fn) {
#ifdef _OPENMP
  const int threads = thread_count();
  if (threads > 1 && end - begin > 256) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (Index i = begin; i < end; ++i) fn(i);
    return;
  }
#endif
  for (Index i = begin; i < end; ++i) fn(i);
}

/// Fixed-order accumulation; the result does not depend on the thread count.
inline double deterministic_sum(const std::vector<double>& terms) {
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace geoheat
