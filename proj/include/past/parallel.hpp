#pragma once

// Data-parallel kernels. Every kernel has a serial reference path and an
// OpenMP path; both write into index-addressed slots and reduce with the same
// pairwise summation, so they produce bit-identical results.

#include <cstddef>
#include <span>
#include <vector>

#ifdef PAST_HAVE_OPENMP
#include <omp.h>
#endif

namespace past::parallel {

enum class Backend { Serial, OpenMP };

inline bool openmp_available() noexcept {
#ifdef PAST_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

/// Backend used when a caller does not pick one explicitly.
Backend default_backend() noexcept;
void set_default_backend(Backend b) noexcept;

/// Sets the OpenMP team size for subsequent kernels; no-op without OpenMP.
void set_num_threads(int n) noexcept;
int max_threads() noexcept;

/// Restores the previous thread count on scope exit.
class ThreadCountScope {
 public:
  explicit ThreadCountScope(int n) : previous_(max_threads()) { set_num_threads(n); }
  ~ThreadCountScope() { set_num_threads(previous_); }
  ThreadCountScope(const ThreadCountScope&) = delete;
  ThreadCountScope& operator=(const ThreadCountScope&) = delete;

 private:
  int previous_;
};

/// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> values) noexcept;

/// Calls fn(i) for i in [0, n). fn must only write state owned by index i.
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn, Backend backend) {
  if (backend == Backend::OpenMP && openmp_available()) {
#ifdef PAST_HAVE_OPENMP
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    return;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  for_each_index(n, std::forward<Fn>(fn), default_backend());
}

/// out[i] = fn(i), evaluated with the chosen backend.
template <class Fn>
std::vector<double> map_indices(std::size_t n, Fn&& fn, Backend backend) {
  std::vector<double> out(n);
  for_each_index(n, [&](std::size_t i) { out[i] = fn(i); }, backend);
  return out;
}

template <class Fn>
std::vector<double> map_indices(std::size_t n, Fn&& fn) {
  return map_indices(n, std::forward<Fn>(fn), default_backend());
}

}  // namespace past::parallel
