#pragma once

#include "tracekit/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tracekit {

inline constexpr std::size_t kForecastFeatureCount = 4;
extern const std::array<const char*, kForecastFeatureCount> kForecastFeatureNames;
using FeatureRow = std::array<double, kForecastFeatureCount>;

// Per-day sums of {max_rss, stime, utime, gpu_secs}, gap days zero-filled.
struct DailySeries {
    std::int64_t first_day = 0;  // days since epoch
    std::vector<FeatureRow> rows;
    std::vector<bool> gap;

    std::int64_t day(std::size_t i) const { return first_day + static_cast<std::int64_t>(i); }
};

DailySeries daily_aggregate(const std::vector<DatedJob>& jobs);

// Per-feature min-max map to [0, 1], fitted on training rows only. Constant
// features map to 0 and are flagged.
class FeatureScaler {
public:
    static FeatureScaler fit(std::span<const FeatureRow> train_rows);

    FeatureRow transform(const FeatureRow& row) const;
    FeatureRow inverse(const FeatureRow& row) const;

    const FeatureRow& minima() const { return min_; }
    const FeatureRow& maxima() const { return max_; }
    bool constant(std::size_t feature) const { return constant_[feature]; }

    FeatureRow min_{};
    FeatureRow max_{};
    std::array<bool, kForecastFeatureCount> constant_{};
};

// Sliding stride-1 supervised windows: input_len days in, the next
// output_len days as targets.
struct WindowedDataset {
    std::size_t input_len = 30;
    std::size_t output_len = 7;
    std::size_t count = 0;
    std::vector<double> inputs;    // count * input_len * features
    std::vector<double> targets;   // count * output_len * features
    std::vector<std::size_t> start_rows;  // provenance: series row of each window

    std::span<const double> input(std::size_t i) const {
        const std::size_t stride = input_len * kForecastFeatureCount;
        return {inputs.data() + i * stride, stride};
    }
    std::span<const double> target(std::size_t i) const {
        const std::size_t stride = output_len * kForecastFeatureCount;
        return {targets.data() + i * stride, stride};
    }
};

WindowedDataset make_windows(const std::vector<FeatureRow>& series, std::size_t input_len = 30,
                             std::size_t output_len = 7);

// Seeded permutation split; train gets floor(train_fraction * N) samples.
std::pair<WindowedDataset, WindowedDataset> split_shuffle(const WindowedDataset& dataset,
                                                          double train_fraction,
                                                          std::uint64_t seed);

WindowedDataset scale_dataset(const WindowedDataset& dataset, const FeatureScaler& scaler);

struct ModelConfig {
    std::size_t features = kForecastFeatureCount;
    std::size_t hidden = 200;
    std::size_t head_hidden = 100;
    std::size_t input_len = 30;
    std::size_t output_len = 7;
};

// Flat parameter offsets: the four gate input/recurrent/bias blocks, then
// per-head dense-1 / dense-2 blocks. Gate order: input, forget, candidate,
// output.
struct ParamLayout {
    std::size_t F = 0, H = 0, Hh = 0;

    explicit ParamLayout(const ModelConfig& c)
        : F(c.features), H(c.hidden), Hh(c.head_hidden) {}

    std::size_t wx(std::size_t gate, std::size_t unit, std::size_t feature) const {
        return (gate * H + unit) * F + feature;
    }
    std::size_t wh(std::size_t gate, std::size_t unit, std::size_t prev) const {
        return 4 * H * F + (gate * H + unit) * H + prev;
    }
    std::size_t bias(std::size_t gate, std::size_t unit) const {
        return 4 * H * F + 4 * H * H + gate * H + unit;
    }
    std::size_t head_base() const { return 4 * H * F + 4 * H * H + 4 * H; }
    std::size_t head_stride() const { return Hh * H + Hh + Hh + 1; }
    std::size_t w1(std::size_t head, std::size_t j, std::size_t unit) const {
        return head_base() + head * head_stride() + j * H + unit;
    }
    std::size_t b1(std::size_t head, std::size_t j) const {
        return head_base() + head * head_stride() + Hh * H + j;
    }
    std::size_t w2(std::size_t head, std::size_t j) const {
        return head_base() + head * head_stride() + Hh * H + Hh + j;
    }
    std::size_t b2(std::size_t head) const {
        return head_base() + head * head_stride() + Hh * H + 2 * Hh;
    }
    std::size_t total() const { return head_base() + F * head_stride(); }
};

struct TrainOptions {
    std::size_t epochs = 11;
    std::size_t batch = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 42;
    double clip = 0;  // 0 disables gradient clipping
    std::size_t hidden = 200;
    std::size_t head_hidden = 100;
};

struct ForecastModel {
    ModelConfig config;
    std::vector<double> params;  // ParamLayout order
    FeatureScaler scaler;
    TrainOptions hyper;
};

// Seeded initialization: weights uniform in +-1/sqrt(fan-in), biases zero
// except the forget gate at 1.
ForecastModel init_model(const ModelConfig& config, const TrainOptions& hyper,
                         const FeatureScaler& scaler);

// Runs the recurrent cell over the input, repeats the final hidden state
// output_len times and applies each head's dense pair per repeated step.
// Returns output_len x features, row-major.
std::vector<double> model_forward(const ForecastModel& model, std::span<const double> input);

// Eq-style mean squared error; the model loss is the mean of per-head MSEs.
double mse(std::span<const double> y, std::span<const double> y_pred);

struct TrainReport {
    std::vector<double> epoch_losses;  // mean training loss per epoch
    std::optional<double> test_loss;
    std::size_t epochs_run = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
};

// Mini-batch BPTT with Adam (0.9 / 0.999, eps 1e-8). Deterministic for a
// fixed seed regardless of thread count; per-sample gradients are reduced in
// sample order.
std::pair<ForecastModel, TrainReport> train(const WindowedDataset& train_set,
                                            const WindowedDataset& test_set,
                                            const FeatureScaler& scaler,
                                            const TrainOptions& options);

// Normalized loss of a model over a dataset (mean of per-head MSEs).
double evaluate(const ForecastModel& model, const WindowedDataset& dataset);

// Analytic BPTT gradients against central finite differences (perturbation
// 1e-5) over every parameter; returns the max relative error.
double gradient_check(const ForecastModel& model, std::span<const double> input,
                      std::span<const double> target);

// Per-sample gradient of the mean-of-head-MSE loss; exposed for the check.
void sample_gradient(const ForecastModel& model, std::span<const double> input,
                     std::span<const double> target, std::span<double> gradient_out,
                     double* loss_out);

// Raw-scale forecast: scale, forward, inverse. Requires exactly input_len
// rows.
std::vector<FeatureRow> predict(const ForecastModel& model,
                                std::span<const FeatureRow> last_days);

// Versioned flat file, little-endian 64-bit floats; load validates shapes.
void save_model(const ForecastModel& model, std::ostream& out);
ForecastModel load_model(std::istream& in);
void save_model_file(const ForecastModel& model, const std::string& path);
ForecastModel load_model_file(const std::string& path);

std::string train_report_json(const TrainReport& report);
std::string daily_series_csv(const DailySeries& series);
std::string prediction_csv(std::int64_t first_day, const std::vector<FeatureRow>& forecast);

}  // namespace tracekit
