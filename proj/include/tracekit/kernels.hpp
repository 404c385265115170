#pragma once

#include <cstddef>
#include <cstdint>

namespace tracekit::kernels {

// Serial reference implementations. The OpenMP variants below must produce
// bitwise-identical output for any thread count: every output element is
// computed independently with the same per-element arithmetic.

namespace serial {

template <class Fn>
void for_index(std::size_t n, Fn&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

// Nearest centroid per row. points is n x d row-major, centroids k x d.
// Ties go to the lowest centroid index.
void assign_nearest(const double* points, std::size_t n, std::size_t d,
                    const double* centroids, std::size_t k,
                    std::uint32_t* assignment, double* dist2);

}  // namespace serial

template <class Fn>
void for_index(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        fn(static_cast<std::size_t>(i));
#else
    serial::for_index(n, fn);
#endif
}

void assign_nearest(const double* points, std::size_t n, std::size_t d,
                    const double* centroids, std::size_t k,
                    std::uint32_t* assignment, double* dist2);

}  // namespace tracekit::kernels
