#pragma once

#include "tracekit/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace tracekit {

// Extraction rule for project/area identifiers from the command path.
// The pattern must contain the named capture groups (?<area_code>...) and
// (?<project_number>...); names are translated to group positions because
// std::regex only supports numbered groups.
class ProjectAreaRule {
public:
    // Throws ConfigError when the pattern does not compile or lacks a group.
    static ProjectAreaRule compile(const std::string& pattern,
                                   std::map<std::string, int> area_map);

    static const char* default_pattern();  // three-letter code + three digits

    const std::regex& regex() const { return regex_; }
    const std::map<std::string, int>& area_map() const { return area_map_; }
    int area_code_group() const { return area_code_group_; }
    int project_number_group() const { return project_number_group_; }

private:
    ProjectAreaRule() = default;
    std::regex regex_;
    std::map<std::string, int> area_map_;
    int area_code_group_ = 0;
    int project_number_group_ = 0;
};

// end_time - start_time; throws DataError("incomplete trace") when either
// timestamp is missing.
std::int64_t compute_duration(const JobTrace& trace);

struct ProjectArea {
    std::string project_id;  // area_code + project_number text
    int area_id = 0;
};

// First pattern match wins; unmapped area codes count as no match.
std::optional<ProjectArea> extract_project_area(const std::string& command,
                                                const ProjectAreaRule& rule);

constexpr std::int64_t kMinDurationSeconds = 780;  // 13 minutes

struct SanitizeResult {
    std::vector<CleanJob> jobs;
    // Surviving row count after each of the six steps:
    //   1 successful exit, 2 duration attached, 3 GPU time > 0,
    //   4 duration >= 780 s, 5 project/area extracted, 6 studied fields complete.
    std::array<std::size_t, 6> attrition{};
};

SanitizeResult sanitize(const std::vector<JobTrace>& traces, const ProjectAreaRule& rule);

// Light preparation for the seasonality studies: keeps failures, GPU-less and
// short jobs; attaches duration where both timestamps exist; drops only rows
// without a start time.
std::vector<DatedJob> prepare_unfiltered(const std::vector<JobTrace>& traces);

std::vector<DatedJob> to_dated(const std::vector<CleanJob>& jobs);

std::string attrition_json(const SanitizeResult& result, std::size_t rows_in);

// Job-table emitters; clusters, when given, append a cluster column.
std::string clean_jobs_csv(const std::vector<CleanJob>& jobs,
                           const std::vector<std::uint32_t>* clusters = nullptr);
std::string dated_jobs_csv(const std::vector<DatedJob>& jobs);

}  // namespace tracekit
