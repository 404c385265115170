#include "tracekit/timeseries.hpp"

#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/loess.hpp"
#include "tracekit/time_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tracekit {

MonthKey MonthKey::from_epoch(std::int64_t epoch_seconds) {
    CivilDate c = civil_from_epoch(epoch_seconds);
    return {c.year, c.month};
}

std::int64_t MonthKey::start_epoch() const { return days_from_civil(year, month, 1) * 86400; }

MonthKey MonthKey::next() const {
    return month == 12 ? MonthKey{year + 1, 1} : MonthKey{year, month + 1};
}

std::string MonthKey::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

std::vector<MonthKey> MonthKey::range(MonthKey first, MonthKey last) {
    std::vector<MonthKey> out;
    for (MonthKey m = first; m <= last; m = m.next()) out.push_back(m);
    return out;
}

const std::array<const char*, kMetricCount> kMetricNames = {
    "node_count", "max_rss", "stime", "duration", "gpu_secs", "gpu_maxmem", "gpu_summem"};

std::optional<Metric> metric_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kMetricCount; ++i)
        if (name == kMetricNames[i]) return static_cast<Metric>(i);
    return std::nullopt;
}

std::optional<Statistic> statistic_from_name(const std::string& name) {
    if (name == "sum") return Statistic::Sum;
    if (name == "mean") return Statistic::Mean;
    if (name == "max") return Statistic::Max;
    return std::nullopt;
}

const char* statistic_name(Statistic s) {
    switch (s) {
        case Statistic::Sum: return "sum";
        case Statistic::Mean: return "mean";
        case Statistic::Max: return "max";
    }
    return "?";
}

namespace {

std::optional<double> metric_value(const DatedJob& job, Metric metric) {
    const JobTrace& t = job.trace;
    switch (metric) {
        case Metric::NodeCount:
            if (t.node_count) return static_cast<double>(*t.node_count);
            return std::nullopt;
        case Metric::MaxRss: return t.max_rss;
        case Metric::Stime: return t.stime;
        case Metric::Duration:
            if (job.duration) return static_cast<double>(*job.duration);
            return std::nullopt;
        case Metric::GpuSecs: return t.gpu_secs;
        case Metric::GpuMaxmem: return t.gpu_maxmem;
        case Metric::GpuSummem: return t.gpu_summem;
    }
    return std::nullopt;
}

}  // namespace

std::map<MonthKey, std::vector<DatedJob>> bucket_by_month(const std::vector<DatedJob>& jobs) {
    std::map<MonthKey, std::vector<DatedJob>> buckets;
    for (const DatedJob& j : jobs) buckets[MonthKey::from_epoch(j.start_time())].push_back(j);
    return buckets;
}

std::vector<std::size_t> gpu_availability(const std::vector<GpuEvent>& events,
                                          const std::vector<MonthKey>& months,
                                          std::int64_t horizon_end) {
    struct Point {
        std::int64_t time;
        int delta;
    };
    std::vector<Point> points;
    points.reserve(events.size() * 2);
    for (const GpuEvent& e : events) {
        points.push_back({e.insert, +1});
        // Half-open presence [insert, remove); without a removal the card
        // stays present through horizon_end inclusive.
        points.push_back({e.remove ? *e.remove : horizon_end + 1, -1});
    }
    // Removals first at equal timestamps (delta -1 sorts before +1).
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.delta < b.delta;
    });

    std::vector<std::size_t> out;
    out.reserve(months.size());
    std::int64_t current = 0;
    std::size_t idx = 0;
    for (const MonthKey& mk : months) {
        const std::int64_t begin = mk.start_epoch();
        const std::int64_t end = mk.next().start_epoch();
        while (idx < points.size() && points[idx].time <= begin) current += points[idx++].delta;
        std::int64_t month_max = current;
        while (idx < points.size() && points[idx].time < end) {
            const std::int64_t t = points[idx].time;
            while (idx < points.size() && points[idx].time == t) current += points[idx++].delta;
            month_max = std::max(month_max, current);
        }
        out.push_back(static_cast<std::size_t>(std::max<std::int64_t>(month_max, 0)));
    }
    return out;
}

std::vector<MonthlyAggregate> monthly_aggregates(const std::vector<DatedJob>& jobs,
                                                 const std::vector<GpuEvent>& gpu_events,
                                                 std::optional<std::int64_t> horizon_end) {
    if (jobs.empty()) throw DataError("monthly aggregation needs at least one job");

    auto buckets = bucket_by_month(jobs);
    const std::vector<MonthKey> months =
        MonthKey::range(buckets.begin()->first, buckets.rbegin()->first);

    std::int64_t horizon;
    if (horizon_end) {
        horizon = *horizon_end;
    } else {
        horizon = std::numeric_limits<std::int64_t>::min();
        for (const DatedJob& j : jobs) {
            horizon = std::max(horizon, j.start_time());
            if (j.trace.end_time) horizon = std::max(horizon, *j.trace.end_time);
        }
        for (const GpuEvent& e : gpu_events) {
            horizon = std::max(horizon, e.insert);
            if (e.remove) horizon = std::max(horizon, *e.remove);
        }
    }
    const std::vector<std::size_t> gpus = gpu_availability(gpu_events, months, horizon);

    std::vector<MonthlyAggregate> out;
    out.reserve(months.size());
    for (std::size_t m = 0; m < months.size(); ++m) {
        MonthlyAggregate agg;
        agg.month = months[m];
        agg.gpus_available = gpus[m];
        auto it = buckets.find(months[m]);
        if (it != buckets.end()) {
            agg.jobs_running = it->second.size();
            for (const DatedJob& job : it->second) {
                if (job.trace.alps_exit && *job.trace.alps_exit != 0) ++agg.jobs_failed;
                if (job.trace.node_count)
                    agg.nodes_max = agg.nodes_max ? std::max(*agg.nodes_max, *job.trace.node_count)
                                                  : *job.trace.node_count;
                for (std::size_t k = 0; k < kMetricCount; ++k) {
                    auto v = metric_value(job, static_cast<Metric>(k));
                    if (!v) continue;
                    MetricStat& stat = agg.metrics[k];
                    stat.sum += *v;
                    stat.count += 1;
                    stat.max = stat.max ? std::max(*stat.max, *v) : *v;
                }
            }
            for (MetricStat& stat : agg.metrics)
                if (stat.count > 0) stat.mean = stat.sum / static_cast<double>(stat.count);
        }
        out.push_back(std::move(agg));
    }
    return out;
}

namespace {

// Centered moving average of length p; output is p-1 shorter.
std::vector<double> moving_average(const std::vector<double>& v, std::size_t p) {
    std::vector<double> out(v.size() - p + 1);
    double window = 0;
    for (std::size_t i = 0; i < p; ++i) window += v[i];
    out[0] = window / static_cast<double>(p);
    for (std::size_t i = p; i < v.size(); ++i) {
        window += v[i] - v[i - p];
        out[i - p + 1] = window / static_cast<double>(p);
    }
    return out;
}

}  // namespace

StlResult stl_decompose(const std::vector<double>& series, int period, int seasonal_window,
                        int trend_window, int robust_iterations) {
    const std::size_t n = series.size();
    if (period < 2) throw std::invalid_argument("stl: period must be >= 2");
    if (n < 2 * static_cast<std::size_t>(period))
        throw std::invalid_argument("stl: series must cover at least two periods");
    if (seasonal_window < 3 || seasonal_window % 2 == 0)
        throw std::invalid_argument("stl: seasonal window must be odd and >= 3");
    if (trend_window < 3 || trend_window % 2 == 0)
        throw std::invalid_argument("stl: trend window must be odd and >= 3");
    if (robust_iterations < 0) throw std::invalid_argument("stl: negative robustness count");

    const std::size_t p = static_cast<std::size_t>(period);
    const std::size_t lowpass_window = p % 2 == 1 ? p : p + 1;

    std::vector<double> trend(n, 0.0);
    std::vector<double> seasonal(n, 0.0);
    std::vector<double> robustness;  // empty on the first pass
    std::vector<double> detrended(n), extended(n + 2 * p), deseasonalized(n);

    for (int pass = 0; pass <= robust_iterations; ++pass) {
        // Cycle-subseries smoothing, each subseries extended one cycle at
        // both ends so the low-pass filter can stay centered.
        for (std::size_t i = 0; i < n; ++i) detrended[i] = series[i] - trend[i];
        for (std::size_t pos = 0; pos < p; ++pos) {
            std::vector<double> sub, sub_rho;
            for (std::size_t i = pos; i < n; i += p) {
                sub.push_back(detrended[i]);
                if (!robustness.empty()) sub_rho.push_back(robustness[i]);
            }
            const std::size_t m = sub.size();
            for (std::size_t j = 0; j <= m + 1; ++j) {
                const double x = static_cast<double>(j) - 1.0;  // -1 .. m
                extended[j * p + pos] =
                    loess_fit_at(sub, sub_rho, static_cast<std::size_t>(seasonal_window), x);
            }
        }

        // Low pass: MA(p) twice, MA(3), then a LOESS polish; the result
        // aligns with the original sample positions.
        std::vector<double> low = moving_average(moving_average(extended, p), p);
        low = moving_average(low, 3);
        low = loess_smooth(low, {}, lowpass_window);

        for (std::size_t i = 0; i < n; ++i) seasonal[i] = extended[i + p] - low[i];

        for (std::size_t i = 0; i < n; ++i) deseasonalized[i] = series[i] - seasonal[i];
        trend = loess_smooth(deseasonalized, robustness, static_cast<std::size_t>(trend_window));

        if (pass == robust_iterations) break;

        // Bisquare robustness weights from the current remainder.
        std::vector<double> abs_residual(n);
        for (std::size_t i = 0; i < n; ++i)
            abs_residual[i] = std::abs(series[i] - trend[i] - seasonal[i]);
        std::vector<double> sorted = abs_residual;
        std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
        double median = sorted[n / 2];
        if (n % 2 == 0) {
            std::nth_element(sorted.begin(), sorted.begin() + n / 2 - 1, sorted.end());
            median = (median + sorted[n / 2 - 1]) / 2;
        }
        const double h = 6.0 * median;
        robustness.assign(n, 1.0);
        if (h > 1e-12) {
            for (std::size_t i = 0; i < n; ++i) {
                const double u = abs_residual[i] / h;
                if (u >= 1.0)
                    robustness[i] = 0.0;
                else
                    robustness[i] = (1.0 - u * u) * (1.0 - u * u);
            }
        }
    }

    StlResult result;
    result.period = period;
    result.trend = std::move(trend);
    result.seasonal = std::move(seasonal);
    result.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        result.residual[i] = series[i] - result.trend[i] - result.seasonal[i];
    return result;
}

SeasonalReport seasonal_report(const std::vector<MonthlyAggregate>& aggregates, Metric metric,
                               Statistic statistic, const StlParams& params) {
    if (aggregates.size() < 2 * static_cast<std::size_t>(params.period))
        throw DataError("insufficient history: need at least " +
                        std::to_string(2 * params.period) + " months, have " +
                        std::to_string(aggregates.size()));

    SeasonalReport report;
    report.months.reserve(aggregates.size());
    report.observed.reserve(aggregates.size());
    for (const MonthlyAggregate& agg : aggregates) {
        const MetricStat& stat = agg.metrics[static_cast<std::size_t>(metric)];
        std::optional<double> value;
        switch (statistic) {
            case Statistic::Sum: value = stat.sum; break;
            case Statistic::Mean: value = stat.mean; break;
            case Statistic::Max: value = stat.max; break;
        }
        report.months.push_back(agg.month);
        report.gap.push_back(stat.count == 0);
        report.observed.push_back(value.value_or(0.0));
    }
    report.stl = stl_decompose(report.observed, params.period, params.seasonal_window,
                               params.trend_window, params.robust_iterations);
    return report;
}

CorrelationMatrix aggregated_correlation(const std::vector<MonthlyAggregate>& aggregates) {
    if (aggregates.size() < 3) throw DataError("aggregated correlation needs at least 3 months");

    DataTable table;
    std::vector<ColumnSpec> specs;
    const std::size_t n = aggregates.size();

    for (std::size_t k = 0; k < kMetricCount; ++k) {
        for (Statistic s : {Statistic::Sum, Statistic::Mean, Statistic::Max}) {
            std::vector<std::optional<double>> column(n);
            for (std::size_t i = 0; i < n; ++i) {
                const MetricStat& stat = aggregates[i].metrics[k];
                switch (s) {
                    case Statistic::Sum: column[i] = stat.sum; break;
                    case Statistic::Mean: column[i] = stat.mean; break;
                    case Statistic::Max: column[i] = stat.max; break;
                }
            }
            std::string name = std::string(statistic_name(s)) + "_" + kMetricNames[k];
            table.add_numeric(name, std::move(column));
            specs.push_back({std::move(name), ColumnKind::Numerical});
        }
    }

    auto add_count = [&](const char* name, auto getter) {
        std::vector<std::optional<double>> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = getter(aggregates[i]);
        table.add_numeric(name, std::move(column));
        specs.push_back({name, ColumnKind::Numerical});
    };
    add_count("jobs_running", [](const MonthlyAggregate& a) -> std::optional<double> {
        return static_cast<double>(a.jobs_running);
    });
    add_count("jobs_failed", [](const MonthlyAggregate& a) -> std::optional<double> {
        return static_cast<double>(a.jobs_failed);
    });
    add_count("gpus_available", [](const MonthlyAggregate& a) -> std::optional<double> {
        return static_cast<double>(a.gpus_available);
    });
    add_count("nodes_max", [](const MonthlyAggregate& a) -> std::optional<double> {
        if (a.nodes_max) return static_cast<double>(*a.nodes_max);
        return std::nullopt;
    });

    return correlation_matrix(table, specs);
}

std::string seasonal_csv(const SeasonalReport& report) {
    std::ostringstream out;
    CsvWriter writer(out);
    writer.write_row({"month", "observed", "trend", "seasonal", "residual", "gap"});
    for (std::size_t i = 0; i < report.months.size(); ++i)
        writer.write_row({report.months[i].str(), format_double(report.observed[i]),
                          format_double(report.stl.trend[i]), format_double(report.stl.seasonal[i]),
                          format_double(report.stl.residual[i]), report.gap[i] ? "1" : "0"});
    return out.str();
}

std::string aggregates_csv(const std::vector<MonthlyAggregate>& aggregates) {
    std::ostringstream out;
    CsvWriter writer(out);
    std::vector<std::string> header{"month", "jobs_running", "jobs_failed", "gpus_available",
                                    "nodes_max"};
    for (std::size_t k = 0; k < kMetricCount; ++k)
        for (const char* s : {"sum", "mean", "max"})
            header.push_back(std::string(s) + "_" + kMetricNames[k]);
    writer.write_row(header);

    for (const MonthlyAggregate& a : aggregates) {
        std::vector<std::string> row{a.month.str(), format_int(static_cast<std::int64_t>(a.jobs_running)),
                                     format_int(static_cast<std::int64_t>(a.jobs_failed)),
                                     format_int(static_cast<std::int64_t>(a.gpus_available)),
                                     a.nodes_max ? format_int(*a.nodes_max) : std::string()};
        for (const MetricStat& stat : a.metrics) {
            row.push_back(format_double(stat.sum));
            row.push_back(stat.mean ? format_double(*stat.mean) : std::string());
            row.push_back(stat.max ? format_double(*stat.max) : std::string());
        }
        writer.write_row(row);
    }
    return out.str();
}

std::string availability_csv(const std::vector<MonthKey>& months,
                             const std::vector<std::size_t>& counts) {
    std::ostringstream out;
    CsvWriter writer(out);
    writer.write_row({"month", "gpus_available"});
    for (std::size_t i = 0; i < months.size(); ++i)
        writer.write_row({months[i].str(), format_int(static_cast<std::int64_t>(counts[i]))});
    return out.str();
}

std::string jobs_per_month_csv(const std::vector<MonthlyAggregate>& aggregates) {
    std::ostringstream out;
    CsvWriter writer(out);
    writer.write_row({"month", "jobs_running", "jobs_failed"});
    for (const MonthlyAggregate& a : aggregates)
        writer.write_row({a.month.str(), format_int(static_cast<std::int64_t>(a.jobs_running)),
                          format_int(static_cast<std::int64_t>(a.jobs_failed))});
    return out.str();
}

}  // namespace tracekit
