#pragma once

#include "tracekit/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tracekit {

// Row-major n x d matrix of standardized features.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // rows * cols
    std::vector<std::string> feature_names;
    std::vector<double> means;    // per column, pre-standardization
    std::vector<double> stddevs;  // population; 0 marks a constant column
    std::vector<bool> constant_flags;

    const double* row(std::size_t i) const { return values.data() + i * cols; }
};

// Z-scores each column (population standard deviation). Constant columns
// become all-zero and are flagged.
FeatureMatrix standardize(const std::vector<double>& raw, std::size_t rows, std::size_t cols,
                          std::vector<std::string> feature_names = {});

struct KMeansResult {
    std::size_t k = 0;
    std::vector<double> centroids;  // k x d, standardized space
    std::vector<std::uint32_t> assignments;
    double inertia = 0;
    std::size_t iterations = 0;
    std::vector<double> cluster_shares;      // fraction of rows per cluster
    std::vector<double> inertia_history;     // per Lloyd iteration, non-increasing
};

// Lloyd iterations from k-means++ seeding. Converges when no assignment
// changes, centroid movement drops below 1e-6, or after 300 iterations.
// Deterministic for a fixed (features, k, seed).
KMeansResult kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed);

struct ElbowResult {
    std::size_t suggested_k = 0;
    std::vector<double> inertia_curve;  // index i holds inertia for k = i + 1
    std::vector<double> chord_distance;
};

// Largest perpendicular distance from the inertia curve to the chord joining
// its endpoints; ties take the smallest k. Curve index i maps to k = i + 1.
std::size_t elbow_from_curve(const std::vector<double>& inertia_curve);

ElbowResult elbow_k(const FeatureMatrix& features, std::size_t k_max, std::uint64_t seed);

// Jobs per area, sorted by area id.
std::vector<std::pair<int, std::size_t>> area_histogram(const std::vector<CleanJob>& jobs);

struct ClusterShareReport {
    std::vector<double> shares;  // descending
    bool dominated = false;      // top share >= 0.99
};

ClusterShareReport cluster_share_report(const KMeansResult& result);

}  // namespace tracekit
