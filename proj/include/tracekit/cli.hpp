#pragma once

#include "tracekit/forecast.hpp"
#include "tracekit/ingest.hpp"
#include "tracekit/timeseries.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tracekit {

// Effective run configuration: the config file merged with flag overrides.
struct RunConfig {
    std::string jobs_path;
    std::string gpus_path;
    std::string out_dir = ".";
    std::string delimiter = ",";

    Schema jobs_schema;
    Schema gpus_schema;
    std::int64_t gpu_time_lag = 0;

    std::string pattern;                  // empty = built-in default
    std::map<std::string, int> area_map;  // inline map, or loaded from file
    std::string area_map_file;

    // Dataset variant; unset picks the per-command default (clean for the
    // job-level studies, unfiltered for the time-series ones).
    std::optional<std::string> variant;

    StlParams stl;
    std::string metric = "node_count";
    std::string statistic = "sum";

    std::optional<std::size_t> k;  // unset = take the elbow suggestion
    std::size_t k_max = 10;
    bool write_assignments = false;

    TrainOptions forecast;
    std::size_t input_len = 30;
    std::size_t output_len = 7;
    double train_fraction = 0.8;
    std::string model_path;  // default <out>/model.bin

    std::uint64_t seed = 42;
    std::optional<std::int64_t> horizon_end;
    double threshold = 0.5;
};

RunConfig load_config_file(const std::string& path);

// Stable digest of the effective configuration (FNV-1a over its canonical
// JSON form), recorded in the run manifest.
std::string config_digest(const RunConfig& config);

// Exit statuses: 0 success, 1 configuration error, 2 data error,
// 3 training divergence.
int run_command(const std::string& command, const RunConfig& config);

}  // namespace tracekit
