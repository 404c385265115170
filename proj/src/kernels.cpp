#include "tracekit/kernels.hpp"

namespace tracekit::kernels {

namespace {

inline void nearest_for_row(const double* point, std::size_t d, const double* centroids,
                            std::size_t k, std::uint32_t& assignment, double& dist2) {
    std::uint32_t best = 0;
    double best_d2 = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double* centroid = centroids + c * d;
        double d2 = 0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = point[j] - centroid[j];
            d2 += diff * diff;
        }
        if (c == 0 || d2 < best_d2) {
            best = static_cast<std::uint32_t>(c);
            best_d2 = d2;
        }
    }
    assignment = best;
    dist2 = best_d2;
}

}  // namespace

namespace serial {

void assign_nearest(const double* points, std::size_t n, std::size_t d,
                    const double* centroids, std::size_t k,
                    std::uint32_t* assignment, double* dist2) {
    for (std::size_t i = 0; i < n; ++i)
        nearest_for_row(points + i * d, d, centroids, k, assignment[i], dist2[i]);
}

}  // namespace serial

void assign_nearest(const double* points, std::size_t n, std::size_t d,
                    const double* centroids, std::size_t k,
                    std::uint32_t* assignment, double* dist2) {
    for_index(n, [&](std::size_t i) {
        nearest_for_row(points + i * d, d, centroids, k, assignment[i], dist2[i]);
    });
}

}  // namespace tracekit::kernels
