#pragma once

#include <cstddef>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lambdaflow {

enum class Exec { serial, parallel };

/// Node-parallel map. Bodies must be pure per-index functions; results are
/// then bitwise identical for any thread count.
template <typename Fn>
void for_each_index(std::ptrdiff_t count, Fn&& fn, Exec exec = Exec::parallel) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    }
}

namespace detail {
inline double pairwise_sum_range(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(x, half) + pairwise_sum_range(x + half, n - half);
}
}  // namespace detail

/// Fixed-order pairwise summation: the reduction tree depends only on the
/// length, never on the thread count, so results are cross-run deterministic.
inline double pairwise_sum(std::span<const double> x) {
    return detail::pairwise_sum_range(x.data(), x.size());
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace lambdaflow
