#include "tracekit/timeseries.hpp"
#include "tracekit/time_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <random>

using namespace tracekit;

namespace {

double variance(const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / static_cast<double>(v.size());
}

std::vector<double> sinusoid(std::size_t n, double period, double amplitude, double slope = 0,
                             double level = 0) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = level + slope * static_cast<double>(i) +
               amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    return y;
}

}  // namespace

TEST_CASE("stl validates its arguments") {
    std::vector<double> series(23, 1.0);
    CHECK_THROWS_AS(stl_decompose(series, 12), std::invalid_argument);          // too short
    std::vector<double> ok(36, 1.0);
    CHECK_THROWS_AS(stl_decompose(ok, 12, 12, 23, 1), std::invalid_argument);   // even window
    CHECK_THROWS_AS(stl_decompose(ok, 12, 13, 22, 1), std::invalid_argument);   // even window
}

TEST_CASE("constant series decomposes into its level") {
    std::vector<double> series(36, 5.0);
    StlResult r = stl_decompose(series, 12);
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(std::abs(r.trend[i] - 5.0) < 1e-6);
        CHECK(std::abs(r.seasonal[i]) < 1e-6);
        CHECK(std::abs(r.residual[i]) < 1e-6);
    }
}

TEST_CASE("additive identity holds on random series") {
    std::mt19937_64 rng(123);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 24 + rng() % 120;
        std::vector<double> series(n);
        for (double& v : series) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 2e6;
        StlResult r = stl_decompose(series, 12);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(r.trend[i] + r.seasonal[i] + r.residual[i] - series[i]) < 1e-9);
    }
}

TEST_CASE("pure sinusoid lands in the seasonal component") {
    auto series = sinusoid(120, 12, 1.0);
    StlResult r = stl_decompose(series, 12);
    CHECK(variance(r.residual) < 0.01 * variance(series));

    // seasonal tracks the generator
    double num = 0, d1 = 0, d2 = 0;
    double ms = 0, mg = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        ms += r.seasonal[i];
        mg += series[i];
    }
    ms /= static_cast<double>(series.size());
    mg /= static_cast<double>(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        num += (r.seasonal[i] - ms) * (series[i] - mg);
        d1 += (r.seasonal[i] - ms) * (r.seasonal[i] - ms);
        d2 += (series[i] - mg) * (series[i] - mg);
    }
    CHECK(num / std::sqrt(d1 * d2) > 0.99);
}

TEST_CASE("linear trend is recovered over the interior") {
    const double slope = 0.1;
    auto series = sinusoid(120, 12, 1.0, slope);
    StlResult r = stl_decompose(series, 12);
    CHECK(variance(r.residual) < 0.01 * variance(series));

    // least-squares slope of the trend over the interior two-thirds
    const std::size_t lo = 20, hi = 100;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        sx += static_cast<double>(i);
        sy += r.trend[i];
        sxx += static_cast<double>(i) * static_cast<double>(i);
        sxy += static_cast<double>(i) * r.trend[i];
    }
    const double fitted = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    CHECK(std::abs(fitted - slope) < 0.05 * slope);
}

TEST_CASE("adding a constant shifts only the trend") {
    std::mt19937_64 rng(5);
    auto series = sinusoid(96, 12, 2.0, 0.05);
    for (double& v : series) v += (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.2;
    StlResult base = stl_decompose(series, 12);

    std::vector<double> shifted = series;
    const double c = 123.25;
    for (double& v : shifted) v += c;
    StlResult moved = stl_decompose(shifted, 12);
    for (std::size_t i = 0; i < series.size(); ++i) {
        CHECK(std::abs(moved.trend[i] - base.trend[i] - c) < 1e-6);
        CHECK(std::abs(moved.seasonal[i] - base.seasonal[i]) < 1e-6);
        CHECK(std::abs(moved.residual[i] - base.residual[i]) < 1e-6);
    }
}

TEST_CASE("seasonal_report decomposes the requested series") {
    // 36 months with a clean 12-month cycle in node_count sums
    std::vector<DatedJob> jobs;
    for (int m = 0; m < 36; ++m) {
        DatedJob j;
        j.trace.start_time = days_from_civil(2015 + m / 12, 1 + m % 12, 10) * 86400;
        j.trace.alps_exit = 0;
        j.trace.node_count =
            100 + static_cast<std::int64_t>(50 * std::sin(2.0 * std::numbers::pi * m / 12.0));
        jobs.push_back(j);
    }
    auto aggs = monthly_aggregates(jobs, {});
    SeasonalReport report = seasonal_report(aggs, Metric::NodeCount, Statistic::Sum);
    REQUIRE(report.observed.size() == 36);

    double smin = 1e300, smax = -1e300;
    for (double s : report.stl.seasonal) {
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    // injected 12-month cycle of amplitude ~50 shows up in the seasonal band
    CHECK(smax - smin > 0.9 * 100);
    CHECK(smax - smin < 1.1 * 100);
}
