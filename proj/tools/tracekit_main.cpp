#include "tracekit/cli.hpp"
#include "tracekit/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"tracekit - HPC scheduler trace and GPU lifecycle analysis"};
    app.require_subcommand(1);
    app.fallthrough(false);

    std::string config_path;
    // Flag values land here and override the config file after parsing.
    struct Overrides {
        std::optional<std::string> jobs, gpus, out, variant, metric, statistic, model,
            delimiter, pattern, area_map_file;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> k, k_max, epochs, batch, hidden, head_hidden, input_len,
            output_len;
        std::optional<int> period, seasonal_window, trend_window, robust_iterations;
        std::optional<double> lr, threshold, train_fraction, clip;
        std::optional<std::int64_t> horizon_end, gpu_time_lag;
        bool write_assignments = false;
    } ov;

    const std::vector<std::string> commands = {
        "ingest",    "preprocess", "correlate",           "cluster",
        "seasonal",  "gpu-avail",  "aggregate-correlate", "forecast-train",
        "forecast-predict"};
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--jobs", ov.jobs, "job trace file");
        sub->add_option("--gpus", ov.gpus, "GPU lifecycle file");
        sub->add_option("--out", ov.out, "output directory");
        sub->add_option("--seed", ov.seed, "seed for every randomized step");
        sub->add_option("--variant", ov.variant, "dataset variant: clean|unfiltered");
        sub->add_option("--delimiter", ov.delimiter, "field delimiter (default ,)");
        sub->add_option("--pattern", ov.pattern, "project/area extraction pattern");
        sub->add_option("--area-map", ov.area_map_file, "JSON file mapping area codes to ids");
        sub->add_option("--gpu-time-lag", ov.gpu_time_lag, "seconds added to GPU event times");
        sub->add_option("--threshold", ov.threshold, "strong-pair threshold");
        sub->add_option("--horizon-end", ov.horizon_end, "epoch seconds; end of GPU presence");
        sub->add_option("--metric", ov.metric, "seasonal metric");
        sub->add_option("--statistic", ov.statistic, "seasonal statistic: sum|mean|max");
        sub->add_option("--period", ov.period, "seasonal period (months)");
        sub->add_option("--seasonal-window", ov.seasonal_window, "STL seasonal window (odd)");
        sub->add_option("--trend-window", ov.trend_window, "STL trend window (odd)");
        sub->add_option("--robust-iterations", ov.robust_iterations, "STL robustness passes");
        sub->add_option("--k", ov.k, "cluster count (default: elbow suggestion)");
        sub->add_option("--k-max", ov.k_max, "largest k for the elbow sweep");
        sub->add_flag("--write-assignments", ov.write_assignments,
                      "emit the job table with a cluster column");
        sub->add_option("--epochs", ov.epochs, "training epochs");
        sub->add_option("--batch", ov.batch, "mini-batch size");
        sub->add_option("--lr", ov.lr, "Adam learning rate");
        sub->add_option("--clip", ov.clip, "gradient norm clip (0 = off)");
        sub->add_option("--hidden", ov.hidden, "recurrent width");
        sub->add_option("--head-hidden", ov.head_hidden, "head dense-1 width");
        sub->add_option("--input-len", ov.input_len, "window input days");
        sub->add_option("--output-len", ov.output_len, "window forecast days");
        sub->add_option("--train-fraction", ov.train_fraction, "train split fraction");
        sub->add_option("--model", ov.model, "model file path");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        tracekit::RunConfig config;
        if (!config_path.empty()) config = tracekit::load_config_file(config_path);

        if (ov.jobs) config.jobs_path = *ov.jobs;
        if (ov.gpus) config.gpus_path = *ov.gpus;
        if (ov.out) config.out_dir = *ov.out;
        if (ov.seed) config.seed = *ov.seed;
        if (ov.variant) config.variant = *ov.variant;
        if (ov.delimiter) config.delimiter = *ov.delimiter;
        if (ov.pattern) config.pattern = *ov.pattern;
        if (ov.area_map_file) config.area_map_file = *ov.area_map_file;
        if (ov.gpu_time_lag) config.gpu_time_lag = *ov.gpu_time_lag;
        if (ov.threshold) config.threshold = *ov.threshold;
        if (ov.horizon_end) config.horizon_end = *ov.horizon_end;
        if (ov.metric) config.metric = *ov.metric;
        if (ov.statistic) config.statistic = *ov.statistic;
        if (ov.period) config.stl.period = *ov.period;
        if (ov.seasonal_window) config.stl.seasonal_window = *ov.seasonal_window;
        if (ov.trend_window) config.stl.trend_window = *ov.trend_window;
        if (ov.robust_iterations) config.stl.robust_iterations = *ov.robust_iterations;
        if (ov.k) config.k = *ov.k;
        if (ov.k_max) config.k_max = *ov.k_max;
        if (ov.write_assignments) config.write_assignments = true;
        if (ov.epochs) config.forecast.epochs = *ov.epochs;
        if (ov.batch) config.forecast.batch = *ov.batch;
        if (ov.lr) config.forecast.learning_rate = *ov.lr;
        if (ov.clip) config.forecast.clip = *ov.clip;
        if (ov.hidden) config.forecast.hidden = *ov.hidden;
        if (ov.head_hidden) config.forecast.head_hidden = *ov.head_hidden;
        if (ov.input_len) config.input_len = *ov.input_len;
        if (ov.output_len) config.output_len = *ov.output_len;
        if (ov.train_fraction) config.train_fraction = *ov.train_fraction;
        if (ov.model) config.model_path = *ov.model;

        return tracekit::run_command(app.get_subcommands().front()->get_name(), config);
    } catch (const tracekit::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }
}
