#include "tracekit/clustering.hpp"

#include "tracekit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace tracekit {

namespace {

// Canonical double in [0, 1); bit-reproducible across standard libraries,
// unlike the std distribution objects.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

}  // namespace

FeatureMatrix standardize(const std::vector<double>& raw, std::size_t rows, std::size_t cols,
                          std::vector<std::string> feature_names) {
    if (rows == 0 || raw.size() != rows * cols)
        throw std::invalid_argument("standardize: shape mismatch");
    FeatureMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.values = raw;
    m.feature_names = std::move(feature_names);
    m.means.resize(cols);
    m.stddevs.resize(cols);
    m.constant_flags.assign(cols, false);

    for (std::size_t j = 0; j < cols; ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < rows; ++i) mean += raw[i * cols + j];
        mean /= static_cast<double>(rows);
        double var = 0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double d = raw[i * cols + j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(rows);
        const double sd = std::sqrt(var);
        m.means[j] = mean;
        m.stddevs[j] = sd;
        if (sd == 0) {
            m.constant_flags[j] = true;
            for (std::size_t i = 0; i < rows; ++i) m.values[i * cols + j] = 0;
        } else {
            for (std::size_t i = 0; i < rows; ++i)
                m.values[i * cols + j] = (raw[i * cols + j] - mean) / sd;
        }
    }
    return m;
}

namespace {

std::vector<double> kmeanspp_seed(const FeatureMatrix& f, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = f.rows;
    const std::size_t d = f.cols;
    std::vector<double> centroids(k * d);
    std::vector<double> dist2(n);

    const std::size_t first = static_cast<std::size_t>(next_unit(rng) * static_cast<double>(n));
    std::copy_n(f.row(std::min(first, n - 1)), d, centroids.begin());

    for (std::size_t i = 0; i < n; ++i) dist2[i] = sq_dist(f.row(i), centroids.data(), d);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0;
        for (double v : dist2) total += v;
        std::size_t chosen;
        if (total > 0) {
            // Inverse-CDF sample proportional to squared distance.
            const double target = next_unit(rng) * total;
            double cum = 0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += dist2[i];
                if (cum > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // All mass at the chosen centroids (duplicate points); any row works.
            chosen = static_cast<std::size_t>(next_unit(rng) * static_cast<double>(n));
            chosen = std::min(chosen, n - 1);
        }
        double* centroid = centroids.data() + c * d;
        std::copy_n(f.row(chosen), d, centroid);
        for (std::size_t i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], sq_dist(f.row(i), centroid, d));
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must be in [1, n]");

    std::mt19937_64 rng(seed);
    KMeansResult result;
    result.k = k;
    result.centroids = kmeanspp_seed(features, k, rng);
    result.assignments.assign(n, 0);

    std::vector<double> dist2(n);
    std::vector<std::uint32_t> previous(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);
    constexpr double kMoveTol = 1e-6;
    constexpr std::size_t kMaxIterations = 300;

    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        kernels::assign_nearest(features.values.data(), n, d, result.centroids.data(), k,
                                result.assignments.data(), dist2.data());

        // Empty-cluster repair: hand the point farthest from its centroid to
        // each empty cluster, one at a time.
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint32_t a : result.assignments) ++counts[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t farthest = 0;
            double worst = -1;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[result.assignments[i]] <= 1) continue;
                if (dist2[i] > worst) {
                    worst = dist2[i];
                    farthest = i;
                }
            }
            --counts[result.assignments[farthest]];
            result.assignments[farthest] = static_cast<std::uint32_t>(c);
            ++counts[c];
            dist2[farthest] = 0;
            std::copy_n(features.row(farthest), d, result.centroids.begin() + c * d);
        }

        // Update step: deterministic per-cluster accumulation in row order.
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = features.row(i);
            double* sum = sums.data() + result.assignments[i] * d;
            for (std::size_t j = 0; j < d; ++j) sum[j] += row[j];
        }
        double movement = 0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                const double updated = sums[c * d + j] / static_cast<double>(counts[c]);
                movement = std::max(movement, std::abs(updated - result.centroids[c * d + j]));
                result.centroids[c * d + j] = updated;
            }
        }

        double inertia = 0;
        for (std::size_t i = 0; i < n; ++i)
            inertia += sq_dist(features.row(i), result.centroids.data() + result.assignments[i] * d, d);
        result.inertia_history.push_back(inertia);
        result.inertia = inertia;
        result.iterations = it + 1;

        const bool stable = result.assignments == previous;
        previous = result.assignments;
        if (stable || movement < kMoveTol) break;
    }

    result.cluster_shares.assign(k, 0);
    for (std::uint32_t a : result.assignments) result.cluster_shares[a] += 1;
    for (double& s : result.cluster_shares) s /= static_cast<double>(n);
    return result;
}

std::size_t elbow_from_curve(const std::vector<double>& inertia_curve) {
    const std::size_t m = inertia_curve.size();
    if (m < 2) throw std::invalid_argument("elbow: need at least two curve points");
    if (m == 2) return 2;

    // Perpendicular distance to the chord; the common denominator is dropped
    // since it does not affect the argmax (this also makes the suggestion
    // invariant under uniform scaling of the curve).
    const double x1 = 1, y1 = inertia_curve.front();
    const double x2 = static_cast<double>(m), y2 = inertia_curve.back();
    std::size_t best_k = 2;
    double best = -1;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double x = static_cast<double>(i + 1);
        const double y = inertia_curve[i];
        const double cross = std::abs((y2 - y1) * (x - x1) - (x2 - x1) * (y - y1));
        if (cross > best) {
            best = cross;
            best_k = i + 1;
        }
    }
    return best_k;
}

ElbowResult elbow_k(const FeatureMatrix& features, std::size_t k_max, std::uint64_t seed) {
    if (k_max < 2) throw std::invalid_argument("elbow_k: k_max must be >= 2");
    ElbowResult result;
    for (std::size_t k = 1; k <= k_max; ++k)
        result.inertia_curve.push_back(kmeans(features, k, seed + k).inertia);
    result.suggested_k = elbow_from_curve(result.inertia_curve);

    const double x1 = 1, y1 = result.inertia_curve.front();
    const double x2 = static_cast<double>(k_max), y2 = result.inertia_curve.back();
    const double len = std::hypot(x2 - x1, y2 - y1);
    for (std::size_t i = 0; i < result.inertia_curve.size(); ++i) {
        const double x = static_cast<double>(i + 1);
        const double y = result.inertia_curve[i];
        const double cross = std::abs((y2 - y1) * (x - x1) - (x2 - x1) * (y - y1));
        result.chord_distance.push_back(len > 0 ? cross / len : 0.0);
    }
    return result;
}

std::vector<std::pair<int, std::size_t>> area_histogram(const std::vector<CleanJob>& jobs) {
    std::map<int, std::size_t> counts;
    for (const CleanJob& j : jobs) ++counts[j.area_id];
    return {counts.begin(), counts.end()};
}

ClusterShareReport cluster_share_report(const KMeansResult& result) {
    ClusterShareReport report;
    report.shares = result.cluster_shares;
    std::sort(report.shares.begin(), report.shares.end(), std::greater<>());
    report.dominated = !report.shares.empty() && report.shares.front() >= 0.99;
    return report;
}

}  // namespace tracekit
