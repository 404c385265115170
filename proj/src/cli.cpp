#include "tracekit/cli.hpp"

#include "tracekit/clustering.hpp"
#include "tracekit/correlation.hpp"
#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/preprocess.hpp"
#include "tracekit/time_util.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tracekit {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

Schema schema_from_json(const ordered_json& j) {
    Schema schema;
    for (auto it = j.begin(); it != j.end(); ++it)
        schema[it.key()] = it.value().get<std::string>();
    return schema;
}

std::map<std::string, int> area_map_from_json(const ordered_json& j) {
    std::map<std::string, int> m;
    for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<int>();
    return m;
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }

    RunConfig c;
    try {
        if (j.contains("jobs")) c.jobs_path = j["jobs"].get<std::string>();
        if (j.contains("gpus")) c.gpus_path = j["gpus"].get<std::string>();
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
        if (j.contains("delimiter")) c.delimiter = j["delimiter"].get<std::string>();
        if (j.contains("jobs_schema")) c.jobs_schema = schema_from_json(j["jobs_schema"]);
        if (j.contains("gpus_schema")) c.gpus_schema = schema_from_json(j["gpus_schema"]);
        if (j.contains("gpu_time_lag")) c.gpu_time_lag = j["gpu_time_lag"].get<std::int64_t>();
        if (j.contains("project_rule")) {
            const auto& rule = j["project_rule"];
            if (rule.contains("pattern")) c.pattern = rule["pattern"].get<std::string>();
            if (rule.contains("area_map")) c.area_map = area_map_from_json(rule["area_map"]);
            if (rule.contains("area_map_file"))
                c.area_map_file = rule["area_map_file"].get<std::string>();
        }
        if (j.contains("variant")) c.variant = j["variant"].get<std::string>();
        if (j.contains("stl")) {
            const auto& stl = j["stl"];
            if (stl.contains("period")) c.stl.period = stl["period"].get<int>();
            if (stl.contains("seasonal_window"))
                c.stl.seasonal_window = stl["seasonal_window"].get<int>();
            if (stl.contains("trend_window")) c.stl.trend_window = stl["trend_window"].get<int>();
            if (stl.contains("robust_iterations"))
                c.stl.robust_iterations = stl["robust_iterations"].get<int>();
        }
        if (j.contains("seasonal")) {
            const auto& s = j["seasonal"];
            if (s.contains("metric")) c.metric = s["metric"].get<std::string>();
            if (s.contains("statistic")) c.statistic = s["statistic"].get<std::string>();
        }
        if (j.contains("cluster")) {
            const auto& cl = j["cluster"];
            if (cl.contains("k")) c.k = cl["k"].get<std::size_t>();
            if (cl.contains("k_max")) c.k_max = cl["k_max"].get<std::size_t>();
            if (cl.contains("write_assignments"))
                c.write_assignments = cl["write_assignments"].get<bool>();
        }
        if (j.contains("forecast")) {
            const auto& f = j["forecast"];
            if (f.contains("epochs")) c.forecast.epochs = f["epochs"].get<std::size_t>();
            if (f.contains("batch")) c.forecast.batch = f["batch"].get<std::size_t>();
            if (f.contains("learning_rate"))
                c.forecast.learning_rate = f["learning_rate"].get<double>();
            if (f.contains("clip")) c.forecast.clip = f["clip"].get<double>();
            if (f.contains("hidden")) c.forecast.hidden = f["hidden"].get<std::size_t>();
            if (f.contains("head_hidden"))
                c.forecast.head_hidden = f["head_hidden"].get<std::size_t>();
            if (f.contains("input_len")) c.input_len = f["input_len"].get<std::size_t>();
            if (f.contains("output_len")) c.output_len = f["output_len"].get<std::size_t>();
            if (f.contains("train_fraction"))
                c.train_fraction = f["train_fraction"].get<double>();
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("horizon_end")) c.horizon_end = j["horizon_end"].get<std::int64_t>();
        if (j.contains("threshold")) c.threshold = j["threshold"].get<double>();
        if (j.contains("model")) c.model_path = j["model"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad config value: " + std::string(e.what()));
    }
    return c;
}

namespace {

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["jobs"] = c.jobs_path;
    j["gpus"] = c.gpus_path;
    j["out"] = c.out_dir;
    j["delimiter"] = c.delimiter;
    j["jobs_schema"] = c.jobs_schema;
    j["gpus_schema"] = c.gpus_schema;
    j["gpu_time_lag"] = c.gpu_time_lag;
    j["pattern"] = c.pattern;
    j["area_map"] = c.area_map;
    j["area_map_file"] = c.area_map_file;
    j["variant"] = c.variant ? ordered_json(*c.variant) : ordered_json(nullptr);
    j["stl"] = {{"period", c.stl.period},
                {"seasonal_window", c.stl.seasonal_window},
                {"trend_window", c.stl.trend_window},
                {"robust_iterations", c.stl.robust_iterations}};
    j["seasonal"] = {{"metric", c.metric}, {"statistic", c.statistic}};
    j["cluster"] = {{"k", c.k ? ordered_json(*c.k) : ordered_json(nullptr)},
                    {"k_max", c.k_max},
                    {"write_assignments", c.write_assignments}};
    j["forecast"] = {{"epochs", c.forecast.epochs},
                     {"batch", c.forecast.batch},
                     {"learning_rate", c.forecast.learning_rate},
                     {"clip", c.forecast.clip},
                     {"hidden", c.forecast.hidden},
                     {"head_hidden", c.forecast.head_hidden},
                     {"input_len", c.input_len},
                     {"output_len", c.output_len},
                     {"train_fraction", c.train_fraction}};
    j["seed"] = c.seed;
    j["horizon_end"] = c.horizon_end ? ordered_json(*c.horizon_end) : ordered_json(nullptr);
    j["threshold"] = c.threshold;
    j["model"] = c.model_path;
    return j;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char b : data) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace

std::string config_digest(const RunConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(config).dump())));
    return buf;
}

namespace {

// Collects artifacts and row counts for the run manifest.
struct RunContext {
    fs::path out_dir;
    std::vector<std::string> artifacts;
    ordered_json counts = ordered_json::object();
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    explicit RunContext(const RunConfig& config) : out_dir(config.out_dir) {
        fs::create_directories(out_dir);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw DataError("cannot write artifact: " + (out_dir / name).string());
        out << content;
        artifacts.push_back(name);
    }

    void finish(const std::string& command, const RunConfig& config) {
        ordered_json m;
        m["command"] = command;
        m["inputs"] = {{"jobs", config.jobs_path}, {"gpus", config.gpus_path}};
        m["config_digest"] = config_digest(config);
        m["seed"] = config.seed;
        m["counts"] = counts;
        m["artifacts"] = artifacts;
        const auto wall = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - started);
        m["wall_time_seconds"] = wall.count();
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        m["generated_at"] = stamp;
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        out << m.dump(2) << "\n";
    }
};

char delimiter_of(const RunConfig& config) {
    if (config.delimiter.size() != 1)
        throw ConfigError("delimiter must be a single character");
    return config.delimiter[0];
}

JobParseResult load_jobs(const RunConfig& config) {
    if (config.jobs_path.empty()) throw ConfigError("this command needs --jobs");
    if (!fs::exists(config.jobs_path))
        throw ConfigError("jobs file does not exist: " + config.jobs_path);
    std::ifstream in(config.jobs_path);
    if (!in) throw ConfigError("cannot open jobs file: " + config.jobs_path);
    ParseOptions options;
    options.delimiter = delimiter_of(config);
    return parse_job_traces(in, config.jobs_schema, options);
}

GpuParseResult load_gpus(const RunConfig& config, bool required) {
    if (config.gpus_path.empty()) {
        if (required) throw ConfigError("this command needs --gpus");
        return {};
    }
    if (!fs::exists(config.gpus_path))
        throw ConfigError("gpus file does not exist: " + config.gpus_path);
    std::ifstream in(config.gpus_path);
    if (!in) throw ConfigError("cannot open gpus file: " + config.gpus_path);
    ParseOptions options;
    options.delimiter = delimiter_of(config);
    options.gpu_time_lag = config.gpu_time_lag;
    return parse_gpu_events(in, config.gpus_schema, options);
}

ProjectAreaRule build_rule(const RunConfig& config) {
    std::map<std::string, int> area_map = config.area_map;
    if (!config.area_map_file.empty()) {
        std::ifstream in(config.area_map_file);
        if (!in) throw ConfigError("cannot open area map file: " + config.area_map_file);
        ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("area map file is not valid JSON: " + std::string(e.what()));
        }
        for (auto it = j.begin(); it != j.end(); ++it)
            area_map[it.key()] = it.value().get<int>();
    }
    const std::string pattern =
        config.pattern.empty() ? ProjectAreaRule::default_pattern() : config.pattern;
    return ProjectAreaRule::compile(pattern, std::move(area_map));
}

bool use_clean_variant(const RunConfig& config, bool default_clean) {
    if (!config.variant) return default_clean;
    if (*config.variant == "clean") return true;
    if (*config.variant == "unfiltered") return false;
    throw ConfigError("variant must be 'clean' or 'unfiltered'");
}

void record_ingest(RunContext& ctx, const char* prefix, const IngestReport& report) {
    ctx.counts[std::string(prefix) + "_rows_read"] = report.rows_read;
    ctx.counts[std::string(prefix) + "_rows_accepted"] = report.rows_accepted;
    ctx.counts[std::string(prefix) + "_rows_rejected"] = report.rows_rejected;
}

// Dated jobs for the time-series commands, honoring the variant selector.
std::vector<DatedJob> dated_jobs(const RunConfig& config, const JobParseResult& jobs,
                                 bool default_clean, RunContext& ctx) {
    if (use_clean_variant(config, default_clean)) {
        SanitizeResult clean = sanitize(jobs.rows, build_rule(config));
        ctx.counts["clean_rows"] = clean.jobs.size();
        return to_dated(clean.jobs);
    }
    auto dated = prepare_unfiltered(jobs.rows);
    ctx.counts["prepared_rows"] = dated.size();
    return dated;
}

std::int64_t resolve_horizon(const RunConfig& config, const std::vector<DatedJob>& jobs,
                             const std::vector<GpuEvent>& events) {
    if (config.horizon_end) return *config.horizon_end;
    std::int64_t horizon = std::numeric_limits<std::int64_t>::min();
    for (const DatedJob& j : jobs) {
        horizon = std::max(horizon, j.start_time());
        if (j.trace.end_time) horizon = std::max(horizon, *j.trace.end_time);
    }
    for (const GpuEvent& e : events) {
        horizon = std::max(horizon, e.insert);
        if (e.remove) horizon = std::max(horizon, *e.remove);
    }
    if (horizon == std::numeric_limits<std::int64_t>::min())
        throw DataError("cannot derive a horizon from empty inputs");
    return horizon;
}

int cmd_ingest(const RunConfig& config) {
    if (config.jobs_path.empty() && config.gpus_path.empty())
        throw ConfigError("ingest needs --jobs and/or --gpus");
    RunContext ctx(config);
    if (!config.jobs_path.empty()) {
        JobParseResult jobs = load_jobs(config);
        std::ostringstream csv;
        write_job_traces(csv, jobs.rows);
        ctx.write("jobs_accepted.csv", csv.str());
        ctx.write("jobs_ingest_report.json", ingest_report_json(jobs.report));
        record_ingest(ctx, "jobs", jobs.report);
    }
    if (!config.gpus_path.empty()) {
        GpuParseResult gpus = load_gpus(config, true);
        std::ostringstream csv;
        write_gpu_events(csv, gpus.rows);
        ctx.write("gpus_accepted.csv", csv.str());
        ctx.write("gpus_ingest_report.json", ingest_report_json(gpus.report));
        record_ingest(ctx, "gpus", gpus.report);
    }
    ctx.finish("ingest", config);
    return 0;
}

int cmd_preprocess(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    if (use_clean_variant(config, true)) {
        SanitizeResult result = sanitize(jobs.rows, build_rule(config));
        ctx.write("clean_jobs.csv", clean_jobs_csv(result.jobs));
        ctx.write("attrition.json", attrition_json(result, jobs.rows.size()));
        ctx.counts["clean_rows"] = result.jobs.size();
    } else {
        auto dated = prepare_unfiltered(jobs.rows);
        ctx.write("prepared_jobs.csv", dated_jobs_csv(dated));
        ctx.counts["prepared_rows"] = dated.size();
    }
    ctx.finish("preprocess", config);
    return 0;
}

int cmd_correlate(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    SanitizeResult clean = sanitize(jobs.rows, build_rule(config));
    ctx.counts["clean_rows"] = clean.jobs.size();

    const std::size_t n = clean.jobs.size();
    std::vector<std::optional<std::string>> project(n);
    std::vector<std::optional<double>> node_count(n), duration(n), max_rss(n), gpu_maxmem(n),
        gpu_summem(n), gpu_secs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CleanJob& j = clean.jobs[i];
        project[i] = j.project_id;
        node_count[i] = static_cast<double>(j.node_count());
        duration[i] = static_cast<double>(j.duration);
        max_rss[i] = j.max_rss();
        gpu_maxmem[i] = j.gpu_maxmem();
        gpu_summem[i] = j.gpu_summem();
        gpu_secs[i] = j.gpu_secs();
    }
    DataTable table;
    table.add_nominal("project", std::move(project));
    table.add_numeric("node_count", std::move(node_count));
    table.add_numeric("duration", std::move(duration));
    table.add_numeric("max_rss", std::move(max_rss));
    table.add_numeric("gpu_maxmem", std::move(gpu_maxmem));
    table.add_numeric("gpu_summem", std::move(gpu_summem));
    table.add_numeric("gpu_secs", std::move(gpu_secs));

    const std::vector<ColumnSpec> specs = {
        {"project", ColumnKind::Nominal},      {"node_count", ColumnKind::Numerical},
        {"duration", ColumnKind::Numerical},   {"max_rss", ColumnKind::Numerical},
        {"gpu_maxmem", ColumnKind::Numerical}, {"gpu_summem", ColumnKind::Numerical},
        {"gpu_secs", ColumnKind::Numerical}};
    CorrelationMatrix matrix = correlation_matrix(table, specs);

    ctx.write("correlation_matrix.csv", matrix_csv(matrix));
    ctx.write("correlation_matrix.json", matrix_json(matrix));
    ctx.write("strong_pairs.csv", strong_pairs_csv(strong_pairs(matrix, config.threshold)));
    ctx.finish("correlate", config);
    return 0;
}

int cmd_cluster(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    SanitizeResult clean = sanitize(jobs.rows, build_rule(config));
    ctx.counts["clean_rows"] = clean.jobs.size();

    {
        std::ostringstream out;
        CsvWriter writer(out);
        writer.write_row({"area_id", "jobs"});
        for (const auto& [area, count] : area_histogram(clean.jobs))
            writer.write_row({format_int(area), format_int(static_cast<std::int64_t>(count))});
        ctx.write("area_histogram.csv", out.str());
    }

    const std::size_t n = clean.jobs.size();
    if (n == 0) throw DataError("no clean jobs to cluster");
    std::vector<double> raw;
    raw.reserve(n * 3);
    for (const CleanJob& j : clean.jobs) {
        raw.push_back(static_cast<double>(j.node_count()));
        raw.push_back(j.max_rss());
        raw.push_back(j.gpu_maxmem());
    }
    FeatureMatrix features = standardize(raw, n, 3, {"node_count", "max_rss", "gpu_maxmem"});

    if (config.k_max > n) throw DataError("k_max exceeds the number of clean jobs");
    ElbowResult elbow = elbow_k(features, config.k_max, config.seed);
    {
        std::ostringstream out;
        CsvWriter writer(out);
        writer.write_row({"k", "inertia", "chord_distance", "suggested"});
        for (std::size_t i = 0; i < elbow.inertia_curve.size(); ++i)
            writer.write_row({format_int(static_cast<std::int64_t>(i + 1)),
                              format_double(elbow.inertia_curve[i]),
                              format_double(elbow.chord_distance[i]),
                              i + 1 == elbow.suggested_k ? "1" : "0"});
        ctx.write("elbow.csv", out.str());
    }

    const std::size_t k = config.k ? *config.k : elbow.suggested_k;
    if (k < 1 || k > n) throw DataError("k out of range for this dataset");
    KMeansResult result = kmeans(features, k, config.seed);
    ClusterShareReport shares = cluster_share_report(result);

    ordered_json report;
    report["k"] = result.k;
    report["suggested_k"] = elbow.suggested_k;
    report["seed"] = config.seed;
    report["inertia"] = result.inertia;
    report["iterations"] = result.iterations;
    report["shares"] = shares.shares;
    report["dominated"] = shares.dominated;
    auto& centroids = report["centroids"] = ordered_json::array();
    for (std::size_t c = 0; c < result.k; ++c) {
        ordered_json entry;
        entry["cluster"] = c;
        ordered_json std_space = ordered_json::array();
        ordered_json raw_space = ordered_json::array();
        for (std::size_t jf = 0; jf < features.cols; ++jf) {
            const double z = result.centroids[c * features.cols + jf];
            std_space.push_back(z);
            raw_space.push_back(z * features.stddevs[jf] + features.means[jf]);
        }
        entry["standardized"] = std_space;
        entry["raw"] = raw_space;
        centroids.push_back(entry);
    }
    ctx.write("cluster_report.json", report.dump(2) + "\n");
    {
        std::ostringstream out;
        CsvWriter writer(out);
        std::vector<std::string> header{"cluster", "size", "share"};
        for (const std::string& f : features.feature_names) header.push_back("centroid_" + f);
        writer.write_row(header);
        for (std::size_t c = 0; c < result.k; ++c) {
            std::vector<std::string> row{
                format_int(static_cast<std::int64_t>(c)),
                format_int(static_cast<std::int64_t>(
                    std::llround(result.cluster_shares[c] * static_cast<double>(n)))),
                format_double(result.cluster_shares[c])};
            for (std::size_t jf = 0; jf < features.cols; ++jf)
                row.push_back(format_double(result.centroids[c * features.cols + jf] *
                                                features.stddevs[jf] +
                                            features.means[jf]));
            writer.write_row(row);
        }
        ctx.write("cluster_shares.csv", out.str());
    }
    if (config.write_assignments)
        ctx.write("cluster_assignments.csv", clean_jobs_csv(clean.jobs, &result.assignments));
    ctx.counts["clusters"] = k;
    ctx.finish("cluster", config);
    return 0;
}

int cmd_seasonal(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    GpuParseResult gpus = load_gpus(config, false);
    auto dated = dated_jobs(config, jobs, false, ctx);

    auto metric = metric_from_name(config.metric);
    if (!metric) throw ConfigError("unknown metric: " + config.metric);
    auto statistic = statistic_from_name(config.statistic);
    if (!statistic) throw ConfigError("unknown statistic: " + config.statistic);

    auto aggregates = monthly_aggregates(dated, gpus.rows, config.horizon_end);
    ctx.counts["months"] = aggregates.size();
    SeasonalReport report = seasonal_report(aggregates, *metric, *statistic, config.stl);

    ctx.write("seasonal_" + config.metric + "_" + config.statistic + ".csv",
              seasonal_csv(report));
    ctx.write("jobs_per_month.csv", jobs_per_month_csv(aggregates));
    ctx.finish("seasonal", config);
    return 0;
}

int cmd_gpu_avail(const RunConfig& config) {
    RunContext ctx(config);
    GpuParseResult gpus = load_gpus(config, true);
    record_ingest(ctx, "gpus", gpus.report);
    if (gpus.rows.empty()) throw DataError("no accepted GPU events");

    std::vector<DatedJob> dated;
    if (!config.jobs_path.empty()) {
        JobParseResult jobs = load_jobs(config);
        record_ingest(ctx, "jobs", jobs.report);
        dated = prepare_unfiltered(jobs.rows);
    }
    const std::int64_t horizon = resolve_horizon(config, dated, gpus.rows);

    MonthKey first, last;
    if (!dated.empty()) {
        auto buckets = bucket_by_month(dated);
        first = buckets.begin()->first;
        last = buckets.rbegin()->first;
    } else {
        std::int64_t lo = gpus.rows.front().insert, hi = horizon;
        for (const GpuEvent& e : gpus.rows) {
            lo = std::min(lo, e.insert);
            if (e.remove) hi = std::max(hi, *e.remove);
        }
        first = MonthKey::from_epoch(lo);
        last = MonthKey::from_epoch(hi);
    }
    const auto months = MonthKey::range(first, last);
    const auto counts = gpu_availability(gpus.rows, months, horizon);
    ctx.counts["months"] = months.size();
    ctx.write("gpu_availability.csv", availability_csv(months, counts));
    ctx.finish("gpu-avail", config);
    return 0;
}

int cmd_aggregate_correlate(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    GpuParseResult gpus = load_gpus(config, false);
    auto dated = dated_jobs(config, jobs, false, ctx);

    auto aggregates = monthly_aggregates(dated, gpus.rows, config.horizon_end);
    ctx.counts["months"] = aggregates.size();
    CorrelationMatrix matrix = aggregated_correlation(aggregates);

    ctx.write("monthly_aggregates.csv", aggregates_csv(aggregates));
    ctx.write("aggregated_correlation.csv", matrix_csv(matrix));
    ctx.write("aggregated_correlation.json", matrix_json(matrix));
    ctx.write("aggregated_strong_pairs.csv",
              strong_pairs_csv(strong_pairs(matrix, config.threshold)));
    ctx.finish("aggregate-correlate", config);
    return 0;
}

int cmd_forecast_train(const RunConfig& config) {
    RunContext ctx(config);
    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    auto dated = dated_jobs(config, jobs, false, ctx);

    DailySeries series = daily_aggregate(dated);
    ctx.counts["days"] = series.rows.size();
    ctx.write("daily_series.csv", daily_series_csv(series));

    WindowedDataset windows = make_windows(series.rows, config.input_len, config.output_len);
    auto [train_raw, test_raw] = split_shuffle(windows, config.train_fraction, config.seed);
    ctx.counts["train_windows"] = train_raw.count;
    ctx.counts["test_windows"] = test_raw.count;

    // Scaler fitted on the rows the training windows actually cover.
    std::vector<bool> in_train(series.rows.size(), false);
    const std::size_t span = config.input_len + config.output_len;
    for (std::size_t start : train_raw.start_rows)
        for (std::size_t d = 0; d < span; ++d) in_train[start + d] = true;
    std::vector<FeatureRow> train_rows;
    for (std::size_t i = 0; i < series.rows.size(); ++i)
        if (in_train[i]) train_rows.push_back(series.rows[i]);
    FeatureScaler scaler = FeatureScaler::fit(train_rows);

    TrainOptions options = config.forecast;
    options.seed = config.seed;
    auto [model, report] = train(scale_dataset(train_raw, scaler),
                                 scale_dataset(test_raw, scaler), scaler, options);

    ctx.write("train_report.json", train_report_json(report));
    {
        std::ostringstream out;
        CsvWriter writer(out);
        writer.write_row({"epoch", "training_loss"});
        for (std::size_t e = 0; e < report.epoch_losses.size(); ++e)
            writer.write_row({format_int(static_cast<std::int64_t>(e + 1)),
                              format_double(report.epoch_losses[e])});
        ctx.write("training_curve.csv", out.str());
    }
    const std::string model_path =
        config.model_path.empty() ? (ctx.out_dir / "model.bin").string() : config.model_path;
    save_model_file(model, model_path);
    ctx.artifacts.push_back(model_path);
    ctx.finish("forecast-train", config);
    if (report.diverged) {
        std::cerr << "training diverged: loss became non-finite\n";
        return 3;
    }
    return 0;
}

int cmd_forecast_predict(const RunConfig& config) {
    RunContext ctx(config);
    if (config.model_path.empty()) throw ConfigError("forecast-predict needs --model");
    if (!fs::exists(config.model_path))
        throw ConfigError("model file does not exist: " + config.model_path);
    ForecastModel model = load_model_file(config.model_path);

    JobParseResult jobs = load_jobs(config);
    record_ingest(ctx, "jobs", jobs.report);
    auto dated = dated_jobs(config, jobs, false, ctx);
    DailySeries series = daily_aggregate(dated);
    if (series.rows.size() < model.config.input_len)
        throw DataError("need " + std::to_string(model.config.input_len) +
                        " days of history, have " + std::to_string(series.rows.size()));

    std::span<const FeatureRow> tail(series.rows.data() + series.rows.size() -
                                         model.config.input_len,
                                     model.config.input_len);
    auto forecast = predict(model, tail);
    const std::int64_t first_day = series.day(series.rows.size() - 1) + 1;
    ctx.write("prediction.csv", prediction_csv(first_day, forecast));
    ctx.counts["forecast_days"] = forecast.size();
    ctx.finish("forecast-predict", config);
    return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config) {
    try {
        if (command == "ingest") return cmd_ingest(config);
        if (command == "preprocess") return cmd_preprocess(config);
        if (command == "correlate") return cmd_correlate(config);
        if (command == "cluster") return cmd_cluster(config);
        if (command == "seasonal") return cmd_seasonal(config);
        if (command == "gpu-avail") return cmd_gpu_avail(config);
        if (command == "aggregate-correlate") return cmd_aggregate_correlate(config);
        if (command == "forecast-train") return cmd_forecast_train(config);
        if (command == "forecast-predict") return cmd_forecast_predict(config);
        throw ConfigError("unknown command: " + command);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace tracekit
