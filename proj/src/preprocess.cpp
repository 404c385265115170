#include "tracekit/preprocess.hpp"

#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace tracekit {

namespace {

// Rewrites (?<name>...) groups to plain (...) and reports the capture-group
// position of each name. Group positions count every '(' that captures.
std::string strip_named_groups(const std::string& pattern,
                               std::map<std::string, int>& positions) {
    std::string out;
    out.reserve(pattern.size());
    int group = 0;
    bool in_class = false;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '\\' && i + 1 < pattern.size()) {
            out.push_back(c);
            out.push_back(pattern[++i]);
            continue;
        }
        if (in_class) {
            if (c == ']') in_class = false;
            out.push_back(c);
            continue;
        }
        if (c == '[') {
            in_class = true;
            out.push_back(c);
            continue;
        }
        if (c != '(') {
            out.push_back(c);
            continue;
        }
        // '(?' introduces either a named group (capturing) or a
        // non-capturing construct such as (?: (?= (?!.
        if (i + 1 < pattern.size() && pattern[i + 1] == '?') {
            if (i + 2 < pattern.size() && pattern[i + 2] == '<' &&
                i + 3 < pattern.size() && pattern[i + 3] != '=' && pattern[i + 3] != '!') {
                std::size_t end = pattern.find('>', i + 3);
                if (end == std::string::npos)
                    throw ConfigError("unterminated group name in pattern");
                positions[pattern.substr(i + 3, end - i - 3)] = ++group;
                out.push_back('(');
                i = end;
                continue;
            }
            out.push_back(c);
            continue;
        }
        ++group;
        out.push_back(c);
    }
    return out;
}

}  // namespace

const char* ProjectAreaRule::default_pattern() {
    return "(?<area_code>[a-z]{3})(?<project_number>[0-9]{3})";
}

ProjectAreaRule ProjectAreaRule::compile(const std::string& pattern,
                                         std::map<std::string, int> area_map) {
    std::map<std::string, int> positions;
    std::string stripped = strip_named_groups(pattern, positions);
    auto area_it = positions.find("area_code");
    auto proj_it = positions.find("project_number");
    if (area_it == positions.end() || proj_it == positions.end())
        throw ConfigError("pattern needs (?<area_code>...) and (?<project_number>...) groups");

    ProjectAreaRule rule;
    try {
        rule.regex_ = std::regex(stripped, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw ConfigError(std::string("pattern does not compile: ") + e.what());
    }
    rule.area_map_ = std::move(area_map);
    rule.area_code_group_ = area_it->second;
    rule.project_number_group_ = proj_it->second;
    return rule;
}

std::int64_t compute_duration(const JobTrace& trace) {
    if (!trace.start_time || !trace.end_time) throw DataError("incomplete trace");
    return *trace.end_time - *trace.start_time;
}

std::optional<ProjectArea> extract_project_area(const std::string& command,
                                                const ProjectAreaRule& rule) {
    std::smatch match;
    if (!std::regex_search(command, match, rule.regex())) return std::nullopt;
    const std::string code = match[static_cast<std::size_t>(rule.area_code_group())].str();
    auto it = rule.area_map().find(code);
    if (it == rule.area_map().end()) return std::nullopt;
    return ProjectArea{
        code + match[static_cast<std::size_t>(rule.project_number_group())].str(),
        it->second};
}

SanitizeResult sanitize(const std::vector<JobTrace>& traces, const ProjectAreaRule& rule) {
    SanitizeResult result;

    struct Stage {
        const JobTrace* trace;
        std::optional<std::int64_t> duration;
        std::optional<ProjectArea> project;
    };
    std::vector<Stage> alive;
    alive.reserve(traces.size());

    // 1. successful completion only
    for (const JobTrace& t : traces)
        if (t.alps_exit && *t.alps_exit == 0) alive.push_back({&t, {}, {}});
    result.attrition[0] = alive.size();

    // 2. attach duration (computation, not a filter)
    for (Stage& s : alive)
        if (s.trace->start_time && s.trace->end_time)
            s.duration = *s.trace->end_time - *s.trace->start_time;
    result.attrition[1] = alive.size();

    auto filter = [&alive](auto pred) {
        std::vector<Stage> kept;
        kept.reserve(alive.size());
        for (Stage& s : alive)
            if (pred(s)) kept.push_back(std::move(s));
        alive = std::move(kept);
    };

    // 3. GPU-accelerated jobs only
    filter([](const Stage& s) { return s.trace->gpu_secs && *s.trace->gpu_secs > 0; });
    result.attrition[2] = alive.size();

    // 4. drop short jobs (strictly shorter than 13 minutes)
    filter([](const Stage& s) { return s.duration && *s.duration >= kMinDurationSeconds; });
    result.attrition[3] = alive.size();

    // 5. attach project and area
    for (Stage& s : alive)
        if (s.trace->command) s.project = extract_project_area(*s.trace->command, rule);
    filter([](const Stage& s) { return s.project.has_value(); });
    result.attrition[4] = alive.size();

    // 6. completeness of the studied numeric fields
    filter([](const Stage& s) {
        const JobTrace& t = *s.trace;
        return t.node_count && t.max_rss && t.gpu_maxmem && t.gpu_summem && t.gpu_secs;
    });
    result.attrition[5] = alive.size();

    result.jobs.reserve(alive.size());
    for (Stage& s : alive) {
        CleanJob job;
        job.trace = *s.trace;
        job.duration = *s.duration;
        job.project_id = std::move(s.project->project_id);
        job.area_id = s.project->area_id;
        result.jobs.push_back(std::move(job));
    }
    return result;
}

std::vector<DatedJob> prepare_unfiltered(const std::vector<JobTrace>& traces) {
    std::vector<DatedJob> out;
    out.reserve(traces.size());
    for (const JobTrace& t : traces) {
        if (!t.start_time) continue;
        DatedJob job{t, std::nullopt};
        if (t.end_time) job.duration = *t.end_time - *t.start_time;
        out.push_back(std::move(job));
    }
    return out;
}

std::vector<DatedJob> to_dated(const std::vector<CleanJob>& jobs) {
    std::vector<DatedJob> out;
    out.reserve(jobs.size());
    for (const CleanJob& j : jobs) out.push_back({j.trace, j.duration});
    return out;
}

std::string attrition_json(const SanitizeResult& result, std::size_t rows_in) {
    nlohmann::ordered_json j;
    j["rows_in"] = rows_in;
    j["surviving_after_step"] = result.attrition;
    j["rows_out"] = result.jobs.size();
    static const char* names[] = {"successful_exit", "duration_attached", "gpu_time_positive",
                                  "min_duration",    "project_extracted", "fields_complete"};
    auto& steps = j["steps"] = nlohmann::ordered_json::array();
    for (int i = 0; i < 6; ++i)
        steps.push_back({{"step", i + 1}, {"name", names[i]}, {"surviving", result.attrition[i]}});
    return j.dump(2) + "\n";
}

namespace {

std::string opt_int(const std::optional<std::int64_t>& v) {
    return v ? format_int(*v) : std::string();
}
std::string opt_dbl(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::vector<std::string> trace_fields(const JobTrace& t) {
    return {opt_int(t.node_count), opt_dbl(t.max_rss),  opt_int(t.start_time),
            opt_int(t.end_time),   opt_int(t.alps_exit), t.command ? *t.command : std::string(),
            opt_dbl(t.gpu_maxmem), opt_dbl(t.gpu_summem), opt_dbl(t.gpu_secs),
            opt_dbl(t.stime),      opt_dbl(t.utime)};
}

const std::vector<std::string> kTraceHeader = {
    "node_count", "max_rss", "start_time", "end_time", "alps_exit", "command",
    "gpu_maxmem", "gpu_summem", "gpu_secs", "stime", "utime"};

}  // namespace

std::string clean_jobs_csv(const std::vector<CleanJob>& jobs,
                           const std::vector<std::uint32_t>* clusters) {
    std::ostringstream out;
    CsvWriter writer(out);
    std::vector<std::string> header = kTraceHeader;
    header.insert(header.end(), {"duration", "project_id", "area_id"});
    if (clusters) header.push_back("cluster");
    writer.write_row(header);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        std::vector<std::string> row = trace_fields(jobs[i].trace);
        row.push_back(format_int(jobs[i].duration));
        row.push_back(jobs[i].project_id);
        row.push_back(format_int(jobs[i].area_id));
        if (clusters) row.push_back(format_int(static_cast<std::int64_t>((*clusters)[i])));
        writer.write_row(row);
    }
    return out.str();
}

std::string dated_jobs_csv(const std::vector<DatedJob>& jobs) {
    std::ostringstream out;
    CsvWriter writer(out);
    std::vector<std::string> header = kTraceHeader;
    header.push_back("duration");
    writer.write_row(header);
    for (const DatedJob& j : jobs) {
        std::vector<std::string> row = trace_fields(j.trace);
        row.push_back(opt_int(j.duration));
        writer.write_row(row);
    }
    return out.str();
}

}  // namespace tracekit
