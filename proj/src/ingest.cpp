#include "tracekit/ingest.hpp"

#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/time_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace tracekit {

const std::vector<std::string> kJobFields = {
    "node_count", "max_rss", "start_time", "end_time", "alps_exit", "command",
    "gpu_maxmem", "gpu_summem", "gpu_secs", "stime", "utime"};

const std::vector<std::string> kGpuFields = {"sn", "insert", "remove"};

bool is_missing_cell(std::string_view cell) {
    static const char* markers[] = {"", "NA", "N/A", "na", "n/a", "null", "NULL",
                                    "None", "nan", "NaN", "-"};
    for (const char* m : markers)
        if (cell == m) return true;
    return false;
}

namespace {

// Resolved column index per canonical field; -1 when the file has no column.
std::vector<int> resolve_columns(const std::vector<std::string>& header,
                                 const std::vector<std::string>& fields,
                                 const Schema& schema) {
    for (const auto& [field, column] : schema) {
        if (std::find(fields.begin(), fields.end(), field) == fields.end())
            throw ConfigError("schema maps unknown field '" + field + "'");
    }
    std::vector<int> indices(fields.size(), -1);
    for (std::size_t f = 0; f < fields.size(); ++f) {
        auto it = schema.find(fields[f]);
        const std::string& column = it != schema.end() ? it->second : fields[f];
        auto pos = std::find(header.begin(), header.end(), column);
        if (pos == header.end()) {
            if (it != schema.end())
                throw ConfigError("mapped column '" + column + "' not found in header");
            continue;  // unmapped canonical field absent from the file: all-missing
        }
        indices[f] = static_cast<int>(pos - header.begin());
    }
    return indices;
}

struct RowReader {
    const std::vector<std::string>& row;
    const std::vector<int>& indices;
    std::string error;

    std::string_view cell(std::size_t field) const {
        int idx = indices[field];
        if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return {};
        return row[static_cast<std::size_t>(idx)];
    }

    bool get_int(std::size_t field, const char* name, std::optional<std::int64_t>& out) {
        auto c = cell(field);
        if (is_missing_cell(c)) return true;
        auto v = parse_int(c);
        if (!v) {
            error = std::string("unparseable integer in ") + name;
            return false;
        }
        out = *v;
        return true;
    }

    bool get_double(std::size_t field, const char* name, std::optional<double>& out) {
        auto c = cell(field);
        if (is_missing_cell(c)) return true;
        auto v = parse_double(c);
        if (!v) {
            error = std::string("unparseable numeric in ") + name;
            return false;
        }
        out = *v;
        return true;
    }

    bool get_time(std::size_t field, const char* name, std::optional<std::int64_t>& out) {
        auto c = cell(field);
        if (is_missing_cell(c)) return true;
        auto v = parse_timestamp(c);
        if (!v) {
            error = std::string("unparseable timestamp in ") + name;
            return false;
        }
        out = *v;
        return true;
    }
};

enum JobField {
    kNodeCount, kMaxRss, kStartTime, kEndTime, kAlpsExit, kCommand,
    kGpuMaxmem, kGpuSummem, kGpuSecs, kStime, kUtime
};

bool nonnegative(const std::optional<double>& v) { return !v || *v >= 0; }

std::string validate_and_fill(RowReader& r, JobTrace& job) {
    if (!r.get_int(kNodeCount, "node_count", job.node_count)) return r.error;
    if (!r.get_double(kMaxRss, "max_rss", job.max_rss)) return r.error;
    if (!r.get_time(kStartTime, "start_time", job.start_time)) return r.error;
    if (!r.get_time(kEndTime, "end_time", job.end_time)) return r.error;
    if (!r.get_int(kAlpsExit, "alps_exit", job.alps_exit)) return r.error;
    auto cmd = r.cell(kCommand);
    if (!is_missing_cell(cmd)) job.command = std::string(cmd);
    if (!r.get_double(kGpuMaxmem, "gpu_maxmem", job.gpu_maxmem)) return r.error;
    if (!r.get_double(kGpuSummem, "gpu_summem", job.gpu_summem)) return r.error;
    if (!r.get_double(kGpuSecs, "gpu_secs", job.gpu_secs)) return r.error;
    if (!r.get_double(kStime, "stime", job.stime)) return r.error;
    if (!r.get_double(kUtime, "utime", job.utime)) return r.error;

    if (job.node_count && *job.node_count < 1) return "node_count below 1";
    if (job.start_time && job.end_time && *job.end_time < *job.start_time)
        return "end_time precedes start_time";
    if (!nonnegative(job.max_rss)) return "negative max_rss";
    if (!nonnegative(job.gpu_maxmem)) return "negative gpu_maxmem";
    if (!nonnegative(job.gpu_summem)) return "negative gpu_summem";
    if (!nonnegative(job.gpu_secs)) return "negative gpu_secs";
    if (!nonnegative(job.stime)) return "negative stime";
    if (!nonnegative(job.utime)) return "negative utime";
    return {};
}

}  // namespace

JobParseResult parse_job_traces(std::istream& source, const Schema& schema,
                                const ParseOptions& options) {
    CsvFile file = read_csv(source, options.delimiter);
    auto indices = resolve_columns(file.header, kJobFields, schema);

    JobParseResult result;
    result.report.rows_read = file.rows.size();
    for (std::size_t i = 0; i < file.rows.size(); ++i) {
        RowReader reader{file.rows[i], indices, {}};
        JobTrace job;
        std::string reason = validate_and_fill(reader, job);
        if (reason.empty()) {
            result.rows.push_back(std::move(job));
            ++result.report.rows_accepted;
        } else {
            ++result.report.rows_rejected;
            result.report.rejection_reasons.emplace_back(file.line_numbers[i], reason);
        }
    }
    return result;
}

GpuParseResult parse_gpu_events(std::istream& source, const Schema& schema,
                                const ParseOptions& options) {
    CsvFile file = read_csv(source, options.delimiter);
    auto indices = resolve_columns(file.header, kGpuFields, schema);

    GpuParseResult result;
    result.report.rows_read = file.rows.size();
    for (std::size_t i = 0; i < file.rows.size(); ++i) {
        RowReader reader{file.rows[i], indices, {}};
        GpuEvent event;
        std::string reason;

        auto sn = reader.cell(0);
        std::optional<std::int64_t> insert, remove;
        if (is_missing_cell(sn)) {
            reason = "empty serial number";
        } else if (!reader.get_time(1, "insert", insert)) {
            reason = reader.error;
        } else if (!insert) {
            reason = "missing insert time";
        } else if (!reader.get_time(2, "remove", remove)) {
            reason = reader.error;
        } else if (remove && *remove < *insert) {
            reason = "remove precedes insert";
        }

        if (reason.empty()) {
            event.sn = std::string(sn);
            event.insert = *insert + options.gpu_time_lag;
            if (remove) event.remove = *remove + options.gpu_time_lag;
            result.rows.push_back(std::move(event));
            ++result.report.rows_accepted;
        } else {
            ++result.report.rows_rejected;
            result.report.rejection_reasons.emplace_back(file.line_numbers[i], reason);
        }
    }
    return result;
}

namespace {

std::string opt_int(const std::optional<std::int64_t>& v) {
    return v ? format_int(*v) : std::string();
}
std::string opt_dbl(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

void write_job_traces(std::ostream& out, const std::vector<JobTrace>& rows, char delimiter) {
    CsvWriter writer(out, delimiter);
    writer.write_row(kJobFields);
    for (const JobTrace& j : rows) {
        writer.write_row({opt_int(j.node_count), opt_dbl(j.max_rss), opt_int(j.start_time),
                          opt_int(j.end_time), opt_int(j.alps_exit),
                          j.command ? *j.command : std::string(), opt_dbl(j.gpu_maxmem),
                          opt_dbl(j.gpu_summem), opt_dbl(j.gpu_secs), opt_dbl(j.stime),
                          opt_dbl(j.utime)});
    }
}

void write_gpu_events(std::ostream& out, const std::vector<GpuEvent>& rows, char delimiter) {
    CsvWriter writer(out, delimiter);
    writer.write_row(kGpuFields);
    for (const GpuEvent& e : rows)
        writer.write_row({e.sn, format_int(e.insert), opt_int(e.remove)});
}

std::string ingest_report_json(const IngestReport& report) {
    nlohmann::ordered_json j;
    j["rows_read"] = report.rows_read;
    j["rows_accepted"] = report.rows_accepted;
    j["rows_rejected"] = report.rows_rejected;
    auto& reasons = j["rejection_reasons"] = nlohmann::ordered_json::array();
    for (const auto& [line, reason] : report.rejection_reasons)
        reasons.push_back({{"line", line}, {"reason", reason}});
    return j.dump(2) + "\n";
}

}  // namespace tracekit
