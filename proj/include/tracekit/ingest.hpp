#pragma once

#include "tracekit/types.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tracekit {

// Maps canonical field names to the column names used by a particular file.
// Fields left unmapped default to their canonical name.
using Schema = std::map<std::string, std::string>;

extern const std::vector<std::string> kJobFields;  // canonical JobTrace fields
extern const std::vector<std::string> kGpuFields;  // sn, insert, remove

struct ParseOptions {
    char delimiter = ',';
    // Constant offset (seconds) added to GPU event times at parse, for
    // correcting a known lag between the two datasets.
    std::int64_t gpu_time_lag = 0;
};

// Empty cells and the usual NA markers are treated as missing, never as zero.
bool is_missing_cell(std::string_view cell);

struct JobParseResult {
    std::vector<JobTrace> rows;
    IngestReport report;
};

struct GpuParseResult {
    std::vector<GpuEvent> rows;
    IngestReport report;
};

// Parses delimiter-separated text with a header row. Rows that violate an
// invariant or hold unparseable numerics are rejected with a per-line reason;
// a header that lacks a mapped column is a ConfigError.
JobParseResult parse_job_traces(std::istream& source, const Schema& schema,
                                const ParseOptions& options = {});
GpuParseResult parse_gpu_events(std::istream& source, const Schema& schema,
                                const ParseOptions& options = {});

// Canonical serialization; re-parsing yields bit-equal field values.
void write_job_traces(std::ostream& out, const std::vector<JobTrace>& rows,
                      char delimiter = ',');
void write_gpu_events(std::ostream& out, const std::vector<GpuEvent>& rows,
                      char delimiter = ',');

std::string ingest_report_json(const IngestReport& report);

}  // namespace tracekit
