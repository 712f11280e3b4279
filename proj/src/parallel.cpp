#include "past/parallel.hpp"

#include <atomic>

namespace past::parallel {

namespace {
std::atomic<Backend> g_backend{openmp_available() ? Backend::OpenMP : Backend::Serial};

double pairwise_sum_impl(const double* v, std::size_t n) noexcept {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}
}  // namespace

Backend default_backend() noexcept { return g_backend.load(std::memory_order_relaxed); }

void set_default_backend(Backend b) noexcept { g_backend.store(b, std::memory_order_relaxed); }

void set_num_threads(int n) noexcept {
#ifdef PAST_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() noexcept {
#ifdef PAST_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double pairwise_sum(std::span<const double> values) noexcept {
  return pairwise_sum_impl(values.data(), values.size());
}

}  // namespace past::parallel
