#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tracekit {

// One raw scheduler record. Any field may be missing; validation only applies
// to fields that are present.
struct JobTrace {
    std::optional<std::int64_t> node_count;
    std::optional<double> max_rss;      // kilobytes, per-node resident maximum
    std::optional<std::int64_t> start_time;  // epoch seconds
    std::optional<std::int64_t> end_time;    // epoch seconds
    std::optional<std::int64_t> alps_exit;
    std::optional<std::string> command;
    std::optional<double> gpu_maxmem;   // kilobytes
    std::optional<double> gpu_summem;   // kilobytes
    std::optional<double> gpu_secs;
    std::optional<double> stime;        // CPU system seconds
    std::optional<double> utime;        // CPU user seconds

    bool operator==(const JobTrace&) const = default;
};

// One GPU lifecycle record: the card identified by `sn` is present in the
// machine from `insert` until `remove` (absent remove = still installed).
struct GpuEvent {
    std::string sn;
    std::int64_t insert = 0;
    std::optional<std::int64_t> remove;

    bool operator==(const GpuEvent&) const = default;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::size_t rows_rejected = 0;
    std::vector<std::pair<std::size_t, std::string>> rejection_reasons;  // (line, reason)
};

// A sanitized job. The sanitation pipeline guarantees alps_exit == 0,
// gpu_secs > 0, duration >= 780 s and all studied fields present.
struct CleanJob {
    JobTrace trace;
    std::int64_t duration = 0;  // end_time - start_time, seconds
    std::string project_id;
    int area_id = 0;

    std::int64_t node_count() const { return *trace.node_count; }
    double max_rss() const { return *trace.max_rss; }
    double gpu_maxmem() const { return *trace.gpu_maxmem; }
    double gpu_summem() const { return *trace.gpu_summem; }
    double gpu_secs() const { return *trace.gpu_secs; }
};

// A trace with a duration attached where both timestamps were present.
// Produced by the light preparation used for the time-series studies; start
// time is guaranteed present.
struct DatedJob {
    JobTrace trace;
    std::optional<std::int64_t> duration;

    std::int64_t start_time() const { return *trace.start_time; }
};

}  // namespace tracekit
