#pragma once

#include "tracekit/correlation.hpp"
#include "tracekit/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tracekit {

struct MonthKey {
    int year = 1970;
    int month = 1;  // 1..12

    auto operator<=>(const MonthKey&) const = default;

    static MonthKey from_epoch(std::int64_t epoch_seconds);
    std::int64_t start_epoch() const;  // first second of the month, UTC
    MonthKey next() const;
    std::string str() const;  // "YYYY-MM"
    // Months from this key up to and including `last`.
    static std::vector<MonthKey> range(MonthKey first, MonthKey last);
};

enum class Metric : std::size_t {
    NodeCount = 0, MaxRss, Stime, Duration, GpuSecs, GpuMaxmem, GpuSummem
};
inline constexpr std::size_t kMetricCount = 7;
extern const std::array<const char*, kMetricCount> kMetricNames;
std::optional<Metric> metric_from_name(const std::string& name);

enum class Statistic { Sum, Mean, Max };
std::optional<Statistic> statistic_from_name(const std::string& name);
const char* statistic_name(Statistic s);

// Sum is always defined (0 over an empty month); mean and max need at least
// one contributing row.
struct MetricStat {
    double sum = 0;
    std::size_t count = 0;
    std::optional<double> mean;
    std::optional<double> max;
};

struct MonthlyAggregate {
    MonthKey month;
    std::array<MetricStat, kMetricCount> metrics;
    std::size_t jobs_running = 0;
    std::size_t jobs_failed = 0;   // alps_exit present and nonzero
    std::size_t gpus_available = 0;
    std::optional<std::int64_t> nodes_max;
};

struct StlResult {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    int period = 0;
};

// Jobs keyed by the month containing their start time.
std::map<MonthKey, std::vector<DatedJob>> bucket_by_month(const std::vector<DatedJob>& jobs);

// Per-month maximum concurrent GPU count. Removals are processed before
// insertions at equal timestamps; a missing removal keeps the GPU present
// through horizon_end.
std::vector<std::size_t> gpu_availability(const std::vector<GpuEvent>& events,
                                          const std::vector<MonthKey>& months,
                                          std::int64_t horizon_end);

// Month-by-month sums/means/maxes plus job and GPU counts, gap-filled over
// the covered month range. Throws DataError on empty input.
std::vector<MonthlyAggregate> monthly_aggregates(
    const std::vector<DatedJob>& jobs, const std::vector<GpuEvent>& gpu_events,
    std::optional<std::int64_t> horizon_end = std::nullopt);

// Seasonal-trend decomposition using LOESS. The additive identity
// trend + seasonal + residual = input holds by construction. The outer
// robustness loop reruns the inner fit `robust_iterations` times with
// bisquare weights.
StlResult stl_decompose(const std::vector<double>& series, int period,
                        int seasonal_window = 13, int trend_window = 23,
                        int robust_iterations = 1);

struct StlParams {
    int period = 12;
    int seasonal_window = 13;
    int trend_window = 23;
    int robust_iterations = 1;
};

struct SeasonalReport {
    StlResult stl;
    std::vector<MonthKey> months;
    std::vector<double> observed;
    std::vector<bool> gap;  // months with no contributing rows (zero-filled)
};

// Decomposes the chosen metric/statistic over the monthly aggregates.
// Needs at least two full periods of history.
SeasonalReport seasonal_report(const std::vector<MonthlyAggregate>& aggregates,
                               Metric metric, Statistic statistic,
                               const StlParams& params = {});

// All-Pearson matrix over every monthly column (21 metric statistics plus
// the job/GPU counts). Needs at least three months.
CorrelationMatrix aggregated_correlation(const std::vector<MonthlyAggregate>& aggregates);

// Plot-ready emitters.
std::string seasonal_csv(const SeasonalReport& report);
std::string aggregates_csv(const std::vector<MonthlyAggregate>& aggregates);
std::string availability_csv(const std::vector<MonthKey>& months,
                             const std::vector<std::size_t>& counts);
std::string jobs_per_month_csv(const std::vector<MonthlyAggregate>& aggregates);

}  // namespace tracekit
