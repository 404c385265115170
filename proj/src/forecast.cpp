#include "tracekit/forecast.hpp"

#include "tracekit/csv.hpp"
#include "tracekit/error.hpp"
#include "tracekit/kernels.hpp"
#include "tracekit/time_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tracekit {

const std::array<const char*, kForecastFeatureCount> kForecastFeatureNames = {
    "max_rss", "stime", "utime", "gpu_secs"};

DailySeries daily_aggregate(const std::vector<DatedJob>& jobs) {
    if (jobs.empty()) throw DataError("daily aggregation needs at least one job");

    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (const DatedJob& j : jobs) {
        const std::int64_t day = epoch_day(j.start_time());
        first = std::min(first, day);
        last = std::max(last, day);
    }

    DailySeries series;
    series.first_day = first;
    const std::size_t days = static_cast<std::size_t>(last - first + 1);
    series.rows.assign(days, FeatureRow{});
    std::vector<std::size_t> contributions(days, 0);

    for (const DatedJob& j : jobs) {
        const std::size_t d = static_cast<std::size_t>(epoch_day(j.start_time()) - first);
        FeatureRow& row = series.rows[d];
        ++contributions[d];
        if (j.trace.max_rss) row[0] += *j.trace.max_rss;
        if (j.trace.stime) row[1] += *j.trace.stime;
        if (j.trace.utime) row[2] += *j.trace.utime;
        if (j.trace.gpu_secs) row[3] += *j.trace.gpu_secs;
    }
    series.gap.resize(days);
    for (std::size_t d = 0; d < days; ++d) series.gap[d] = contributions[d] == 0;
    return series;
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureRow> train_rows) {
    if (train_rows.size() < 2) throw std::invalid_argument("scaler: need at least two rows");
    FeatureScaler s;
    for (std::size_t f = 0; f < kForecastFeatureCount; ++f) {
        double lo = train_rows[0][f], hi = train_rows[0][f];
        for (const FeatureRow& row : train_rows) {
            lo = std::min(lo, row[f]);
            hi = std::max(hi, row[f]);
        }
        s.min_[f] = lo;
        s.max_[f] = hi;
        s.constant_[f] = lo == hi;
    }
    return s;
}

FeatureRow FeatureScaler::transform(const FeatureRow& row) const {
    FeatureRow out{};
    for (std::size_t f = 0; f < kForecastFeatureCount; ++f)
        out[f] = constant_[f] ? 0.0 : (row[f] - min_[f]) / (max_[f] - min_[f]);
    return out;
}

FeatureRow FeatureScaler::inverse(const FeatureRow& row) const {
    FeatureRow out{};
    for (std::size_t f = 0; f < kForecastFeatureCount; ++f)
        out[f] = constant_[f] ? min_[f] : row[f] * (max_[f] - min_[f]) + min_[f];
    return out;
}

WindowedDataset make_windows(const std::vector<FeatureRow>& series, std::size_t input_len,
                             std::size_t output_len) {
    if (input_len == 0 || output_len == 0)
        throw std::invalid_argument("make_windows: window lengths must be positive");
    const std::size_t span = input_len + output_len;
    if (series.size() < span)
        throw DataError("insufficient history: need " + std::to_string(span) +
                        " days, have " + std::to_string(series.size()));

    WindowedDataset ds;
    ds.input_len = input_len;
    ds.output_len = output_len;
    ds.count = series.size() - span + 1;
    ds.inputs.reserve(ds.count * input_len * kForecastFeatureCount);
    ds.targets.reserve(ds.count * output_len * kForecastFeatureCount);
    ds.start_rows.reserve(ds.count);
    for (std::size_t i = 0; i < ds.count; ++i) {
        ds.start_rows.push_back(i);
        for (std::size_t t = 0; t < input_len; ++t)
            for (double v : series[i + t]) ds.inputs.push_back(v);
        for (std::size_t t = 0; t < output_len; ++t)
            for (double v : series[i + input_len + t]) ds.targets.push_back(v);
    }
    return ds;
}

namespace {

// Deterministic helpers; std::shuffle and the distribution objects are
// implementation-defined, these are not.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fisher_yates(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

WindowedDataset take(const WindowedDataset& ds, std::span<const std::size_t> indices) {
    WindowedDataset out;
    out.input_len = ds.input_len;
    out.output_len = ds.output_len;
    out.count = indices.size();
    const std::size_t in_stride = ds.input_len * kForecastFeatureCount;
    const std::size_t out_stride = ds.output_len * kForecastFeatureCount;
    out.inputs.reserve(out.count * in_stride);
    out.targets.reserve(out.count * out_stride);
    for (std::size_t i : indices) {
        auto in = ds.input(i);
        auto tg = ds.target(i);
        out.inputs.insert(out.inputs.end(), in.begin(), in.end());
        out.targets.insert(out.targets.end(), tg.begin(), tg.end());
        out.start_rows.push_back(ds.start_rows[i]);
    }
    return out;
}

}  // namespace

std::pair<WindowedDataset, WindowedDataset> split_shuffle(const WindowedDataset& dataset,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
    if (dataset.count < 2) throw DataError("split needs at least two samples");
    std::vector<std::size_t> order(dataset.count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    fisher_yates(order, rng);
    const std::size_t train_count =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(dataset.count)));
    std::span<const std::size_t> all(order);
    return {take(dataset, all.subspan(0, train_count)), take(dataset, all.subspan(train_count))};
}

WindowedDataset scale_dataset(const WindowedDataset& dataset, const FeatureScaler& scaler) {
    WindowedDataset out = dataset;
    auto apply = [&](std::vector<double>& flat) {
        for (std::size_t i = 0; i + kForecastFeatureCount <= flat.size();
             i += kForecastFeatureCount) {
            FeatureRow row;
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(i), kForecastFeatureCount,
                        row.begin());
            row = scaler.transform(row);
            std::copy_n(row.begin(), kForecastFeatureCount,
                        flat.begin() + static_cast<std::ptrdiff_t>(i));
        }
    };
    apply(out.inputs);
    apply(out.targets);
    return out;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ForwardCache {
    std::vector<double> h, c;               // (T+1) x H
    std::vector<double> gi, gf, gg, go, tc;  // T x H
    std::vector<double> z1, r;               // F x Hh
    std::vector<double> y;                   // F

    void resize(const ModelConfig& cfg) {
        const std::size_t T = cfg.input_len, H = cfg.hidden;
        h.assign((T + 1) * H, 0.0);
        c.assign((T + 1) * H, 0.0);
        gi.assign(T * H, 0.0);
        gf.assign(T * H, 0.0);
        gg.assign(T * H, 0.0);
        go.assign(T * H, 0.0);
        tc.assign(T * H, 0.0);
        z1.assign(cfg.features * cfg.head_hidden, 0.0);
        r.assign(cfg.features * cfg.head_hidden, 0.0);
        y.assign(cfg.features, 0.0);
    }
};

void forward_cached(const ModelConfig& cfg, std::span<const double> params,
                    std::span<const double> input, ForwardCache& cache) {
    const ParamLayout lay(cfg);
    const std::size_t T = cfg.input_len, H = cfg.hidden, F = cfg.features, Hh = cfg.head_hidden;
    std::fill(cache.h.begin(), cache.h.begin() + static_cast<std::ptrdiff_t>(H), 0.0);
    std::fill(cache.c.begin(), cache.c.begin() + static_cast<std::ptrdiff_t>(H), 0.0);

    std::vector<double> a(4 * H);
    for (std::size_t t = 0; t < T; ++t) {
        const double* x = input.data() + t * F;
        const double* h_prev = cache.h.data() + t * H;
        const double* c_prev = cache.c.data() + t * H;
        for (std::size_t g = 0; g < 4; ++g) {
            for (std::size_t u = 0; u < H; ++u) {
                double acc = params[lay.bias(g, u)];
                const double* wx = params.data() + lay.wx(g, u, 0);
                for (std::size_t f = 0; f < F; ++f) acc += wx[f] * x[f];
                const double* wh = params.data() + lay.wh(g, u, 0);
                for (std::size_t v = 0; v < H; ++v) acc += wh[v] * h_prev[v];
                a[g * H + u] = acc;
            }
        }
        double* h_t = cache.h.data() + (t + 1) * H;
        double* c_t = cache.c.data() + (t + 1) * H;
        for (std::size_t u = 0; u < H; ++u) {
            const double gi = sigmoid(a[0 * H + u]);
            const double gf = sigmoid(a[1 * H + u]);
            const double gg = std::tanh(a[2 * H + u]);
            const double go = sigmoid(a[3 * H + u]);
            const double c_new = gf * c_prev[u] + gi * gg;
            const double tc = std::tanh(c_new);
            cache.gi[t * H + u] = gi;
            cache.gf[t * H + u] = gf;
            cache.gg[t * H + u] = gg;
            cache.go[t * H + u] = go;
            cache.tc[t * H + u] = tc;
            c_t[u] = c_new;
            h_t[u] = go * tc;
        }
    }

    const double* h_final = cache.h.data() + T * H;
    for (std::size_t k = 0; k < F; ++k) {
        for (std::size_t j = 0; j < Hh; ++j) {
            double acc = params[lay.b1(k, j)];
            const double* w1 = params.data() + lay.w1(k, j, 0);
            for (std::size_t u = 0; u < H; ++u) acc += w1[u] * h_final[u];
            cache.z1[k * Hh + j] = acc;
            cache.r[k * Hh + j] = acc > 0 ? acc : 0.0;
        }
        double out = params[lay.b2(k)];
        for (std::size_t j = 0; j < Hh; ++j) out += params[lay.w2(k, j)] * cache.r[k * Hh + j];
        cache.y[k] = out;
    }
}

// Loss of one sample: mean over heads of the head's MSE across the repeated
// steps; with equal element counts this equals the grand mean over the
// output_len x features grid.
double sample_loss(const ModelConfig& cfg, const ForwardCache& cache,
                   std::span<const double> target) {
    const std::size_t S = cfg.output_len, F = cfg.features;
    double acc = 0;
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < F; ++k) {
            const double d = cache.y[k] - target[s * F + k];
            acc += d * d;
        }
    return acc / static_cast<double>(S * F);
}

void backward(const ModelConfig& cfg, std::span<const double> params,
              std::span<const double> input, std::span<const double> target,
              const ForwardCache& cache, std::span<double> grad) {
    const ParamLayout lay(cfg);
    const std::size_t T = cfg.input_len, H = cfg.hidden, F = cfg.features, Hh = cfg.head_hidden;
    const std::size_t S = cfg.output_len;

    std::fill(grad.begin(), grad.end(), 0.0);

    // d loss / d y_k; the output repeats across steps so step gradients sum.
    std::vector<double> dy(F, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < F; ++k)
            dy[k] += 2.0 * (cache.y[k] - target[s * F + k]) / static_cast<double>(S * F);

    const double* h_final = cache.h.data() + T * H;
    std::vector<double> dh(H, 0.0);
    for (std::size_t k = 0; k < F; ++k) {
        grad[lay.b2(k)] += dy[k];
        for (std::size_t j = 0; j < Hh; ++j) {
            const double r = cache.r[k * Hh + j];
            grad[lay.w2(k, j)] += dy[k] * r;
            if (cache.z1[k * Hh + j] <= 0) continue;  // rectifier dead region
            const double dz1 = dy[k] * params[lay.w2(k, j)];
            grad[lay.b1(k, j)] += dz1;
            double* gw1 = grad.data() + lay.w1(k, j, 0);
            const double* w1 = params.data() + lay.w1(k, j, 0);
            for (std::size_t u = 0; u < H; ++u) {
                gw1[u] += dz1 * h_final[u];
                dh[u] += dz1 * w1[u];
            }
        }
    }

    std::vector<double> dc(H, 0.0), da(4 * H), dh_prev(H);
    for (std::size_t t = T; t-- > 0;) {
        const double* x = input.data() + t * F;
        const double* h_prev = cache.h.data() + t * H;
        const double* c_prev = cache.c.data() + t * H;
        for (std::size_t u = 0; u < H; ++u) {
            const double gi = cache.gi[t * H + u];
            const double gf = cache.gf[t * H + u];
            const double gg = cache.gg[t * H + u];
            const double go = cache.go[t * H + u];
            const double tc = cache.tc[t * H + u];
            const double dout = dh[u];
            dc[u] += dout * go * (1.0 - tc * tc);
            da[0 * H + u] = dc[u] * gg * gi * (1.0 - gi);
            da[1 * H + u] = dc[u] * c_prev[u] * gf * (1.0 - gf);
            da[2 * H + u] = dc[u] * gi * (1.0 - gg * gg);
            da[3 * H + u] = dout * tc * go * (1.0 - go);
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t g = 0; g < 4; ++g) {
            for (std::size_t u = 0; u < H; ++u) {
                const double d = da[g * H + u];
                if (d == 0) continue;
                grad[lay.bias(g, u)] += d;
                double* gwx = grad.data() + lay.wx(g, u, 0);
                for (std::size_t f = 0; f < F; ++f) gwx[f] += d * x[f];
                double* gwh = grad.data() + lay.wh(g, u, 0);
                const double* wh = params.data() + lay.wh(g, u, 0);
                for (std::size_t v = 0; v < H; ++v) {
                    gwh[v] += d * h_prev[v];
                    dh_prev[v] += d * wh[v];
                }
            }
        }
        for (std::size_t u = 0; u < H; ++u) {
            dc[u] *= cache.gf[t * H + u];
            dh[u] = dh_prev[u];
        }
    }
}

}  // namespace

ForecastModel init_model(const ModelConfig& config, const TrainOptions& hyper,
                         const FeatureScaler& scaler) {
    if (config.features == 0 || config.hidden == 0 || config.head_hidden == 0 ||
        config.input_len == 0 || config.output_len == 0)
        throw std::invalid_argument("model shapes must be positive");
    ForecastModel model;
    model.config = config;
    model.scaler = scaler;
    model.hyper = hyper;
    const ParamLayout lay(config);
    model.params.assign(lay.total(), 0.0);

    std::mt19937_64 rng(hyper.seed);
    auto uniform = [&](double bound) { return (2.0 * next_unit(rng) - 1.0) * bound; };

    const double wx_bound = 1.0 / std::sqrt(static_cast<double>(config.features));
    const double wh_bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
    const double w2_bound = 1.0 / std::sqrt(static_cast<double>(config.head_hidden));

    for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t u = 0; u < config.hidden; ++u)
            for (std::size_t f = 0; f < config.features; ++f)
                model.params[lay.wx(g, u, f)] = uniform(wx_bound);
    for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t u = 0; u < config.hidden; ++u)
            for (std::size_t v = 0; v < config.hidden; ++v)
                model.params[lay.wh(g, u, v)] = uniform(wh_bound);
    // biases stay zero except the forget gate (gate 1), opened at init
    for (std::size_t u = 0; u < config.hidden; ++u) model.params[lay.bias(1, u)] = 1.0;
    for (std::size_t k = 0; k < config.features; ++k) {
        for (std::size_t j = 0; j < config.head_hidden; ++j)
            for (std::size_t u = 0; u < config.hidden; ++u)
                model.params[lay.w1(k, j, u)] = uniform(wh_bound);
        for (std::size_t j = 0; j < config.head_hidden; ++j)
            model.params[lay.w2(k, j)] = uniform(w2_bound);
    }
    return model;
}

std::vector<double> model_forward(const ForecastModel& model, std::span<const double> input) {
    const ModelConfig& cfg = model.config;
    if (input.size() != cfg.input_len * cfg.features)
        throw std::invalid_argument("model_forward: input shape mismatch");
    ForwardCache cache;
    cache.resize(cfg);
    forward_cached(cfg, model.params, input, cache);
    std::vector<double> out(cfg.output_len * cfg.features);
    for (std::size_t s = 0; s < cfg.output_len; ++s)
        for (std::size_t k = 0; k < cfg.features; ++k) out[s * cfg.features + k] = cache.y[k];
    return out;
}

double mse(std::span<const double> y, std::span<const double> y_pred) {
    if (y.size() != y_pred.size()) throw std::invalid_argument("mse: length mismatch");
    if (y.empty()) throw std::invalid_argument("mse: empty input");
    double acc = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y_pred[i];
        acc += d * d;
    }
    return acc / static_cast<double>(y.size());
}

void sample_gradient(const ForecastModel& model, std::span<const double> input,
                     std::span<const double> target, std::span<double> gradient_out,
                     double* loss_out) {
    ForwardCache cache;
    cache.resize(model.config);
    forward_cached(model.config, model.params, input, cache);
    if (loss_out) *loss_out = sample_loss(model.config, cache, target);
    backward(model.config, model.params, input, target, cache, gradient_out);
}

double evaluate(const ForecastModel& model, const WindowedDataset& dataset) {
    if (dataset.count == 0) throw std::invalid_argument("evaluate: empty dataset");
    ForwardCache cache;
    cache.resize(model.config);
    double total = 0;
    for (std::size_t i = 0; i < dataset.count; ++i) {
        forward_cached(model.config, model.params, dataset.input(i), cache);
        total += sample_loss(model.config, cache, dataset.target(i));
    }
    return total / static_cast<double>(dataset.count);
}

std::pair<ForecastModel, TrainReport> train(const WindowedDataset& train_set,
                                            const WindowedDataset& test_set,
                                            const FeatureScaler& scaler,
                                            const TrainOptions& options) {
    if (train_set.count == 0) throw DataError("training partition is empty");

    ModelConfig cfg;
    cfg.hidden = options.hidden;
    cfg.head_hidden = options.head_hidden;
    cfg.input_len = train_set.input_len;
    cfg.output_len = train_set.output_len;

    ForecastModel model = init_model(cfg, options, scaler);
    const ParamLayout lay(cfg);
    const std::size_t P = lay.total();

    TrainReport report;
    report.seed = options.seed;

    std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);  // epoch shuffles
    std::vector<std::size_t> order(train_set.count);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t batch = std::max<std::size_t>(1, options.batch);
    std::vector<std::vector<double>> sample_grads(batch, std::vector<double>(P));
    std::vector<double> sample_losses(batch);
    std::vector<ForwardCache> caches(batch);
    for (ForwardCache& c : caches) c.resize(cfg);

    std::vector<double> grad(P), m(P, 0.0), v(P, 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < options.epochs && !report.diverged; ++epoch) {
        fisher_yates(order, rng);
        double epoch_loss = 0;
        std::size_t seen = 0;

        for (std::size_t begin = 0; begin < order.size() && !report.diverged; begin += batch) {
            const std::size_t size = std::min(batch, order.size() - begin);

            // Per-sample passes are independent; gradients are reduced below
            // in sample order so the result is thread-count independent.
            kernels::for_index(size, [&](std::size_t b) {
                const std::size_t sample = order[begin + b];
                forward_cached(cfg, model.params, train_set.input(sample), caches[b]);
                sample_losses[b] = sample_loss(cfg, caches[b], train_set.target(sample));
                backward(cfg, model.params, train_set.input(sample), train_set.target(sample),
                         caches[b], sample_grads[b]);
            });

            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0;
            for (std::size_t b = 0; b < size; ++b) {
                batch_loss += sample_losses[b];
                const std::vector<double>& g = sample_grads[b];
                for (std::size_t p = 0; p < P; ++p) grad[p] += g[p];
            }
            batch_loss /= static_cast<double>(size);
            const double scale = 1.0 / static_cast<double>(size);
            for (double& g : grad) g *= scale;

            if (!std::isfinite(batch_loss)) {
                report.diverged = true;
                break;
            }
            epoch_loss += batch_loss * static_cast<double>(size);
            seen += size;

            if (options.clip > 0) {
                double norm2 = 0;
                for (double g : grad) norm2 += g * g;
                const double norm = std::sqrt(norm2);
                if (norm > options.clip) {
                    const double shrink = options.clip / norm;
                    for (double& g : grad) g *= shrink;
                }
            }

            ++step;
            const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            bool finite = true;
            for (std::size_t p = 0; p < P; ++p) {
                m[p] = beta1 * m[p] + (1.0 - beta1) * grad[p];
                v[p] = beta2 * v[p] + (1.0 - beta2) * grad[p] * grad[p];
                const double mhat = m[p] / correction1;
                const double vhat = v[p] / correction2;
                model.params[p] -= options.learning_rate * mhat / (std::sqrt(vhat) + eps);
                finite &= std::isfinite(model.params[p]);
            }
            if (!finite) report.diverged = true;
        }

        if (seen > 0) report.epoch_losses.push_back(epoch_loss / static_cast<double>(seen));
        report.epochs_run = epoch + 1;
    }

    if (!report.diverged && test_set.count > 0) report.test_loss = evaluate(model, test_set);
    return {std::move(model), std::move(report)};
}

double gradient_check(const ForecastModel& model, std::span<const double> input,
                      std::span<const double> target) {
    const ParamLayout lay(model.config);
    std::vector<double> analytic(lay.total());
    sample_gradient(model, input, target, analytic, nullptr);

    ForecastModel probe = model;
    ForwardCache cache;
    cache.resize(model.config);
    auto loss_at = [&]() {
        forward_cached(probe.config, probe.params, input, cache);
        return sample_loss(probe.config, cache, target);
    };

    constexpr double h = 1e-5;
    double worst = 0;
    for (std::size_t p = 0; p < probe.params.size(); ++p) {
        const double saved = probe.params[p];
        probe.params[p] = saved + h;
        const double up = loss_at();
        probe.params[p] = saved - h;
        const double down = loss_at();
        probe.params[p] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({1e-4, std::abs(analytic[p]), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
    }
    return worst;
}

std::vector<FeatureRow> predict(const ForecastModel& model,
                                std::span<const FeatureRow> last_days) {
    if (last_days.size() != model.config.input_len)
        throw std::invalid_argument("predict: expected exactly " +
                                    std::to_string(model.config.input_len) + " days, got " +
                                    std::to_string(last_days.size()));
    std::vector<double> input;
    input.reserve(last_days.size() * kForecastFeatureCount);
    for (const FeatureRow& row : last_days)
        for (double v : model.scaler.transform(row)) input.push_back(v);

    const std::vector<double> out = model_forward(model, input);
    std::vector<FeatureRow> forecast(model.config.output_len);
    for (std::size_t s = 0; s < forecast.size(); ++s) {
        FeatureRow scaled;
        std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(s * kForecastFeatureCount),
                    kForecastFeatureCount, scaled.begin());
        forecast[s] = model.scaler.inverse(scaled);
        for (double v : forecast[s])
            if (!std::isfinite(v)) throw DataError("non-finite forecast value");
    }
    return forecast;
}

namespace {

constexpr char kModelMagic[8] = {'T', 'K', 'F', 'M', 'D', 'L', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw DataError("truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_model(const ForecastModel& model, std::ostream& out) {
    out.write(kModelMagic, 8);
    put_u64(out, model.config.features);
    put_u64(out, model.config.hidden);
    put_u64(out, model.config.head_hidden);
    put_u64(out, model.config.input_len);
    put_u64(out, model.config.output_len);
    put_u64(out, model.hyper.epochs);
    put_u64(out, model.hyper.batch);
    put_f64(out, model.hyper.learning_rate);
    put_u64(out, model.hyper.seed);
    put_f64(out, model.hyper.clip);
    for (std::size_t f = 0; f < kForecastFeatureCount; ++f) {
        put_f64(out, model.scaler.min_[f]);
        put_f64(out, model.scaler.max_[f]);
        put_u64(out, model.scaler.constant_[f] ? 1 : 0);
    }
    put_u64(out, model.params.size());
    for (double p : model.params) put_f64(out, p);
}

ForecastModel load_model(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw DataError("not a model file (bad magic)");

    ForecastModel model;
    model.config.features = get_u64(in);
    model.config.hidden = get_u64(in);
    model.config.head_hidden = get_u64(in);
    model.config.input_len = get_u64(in);
    model.config.output_len = get_u64(in);
    model.hyper.epochs = get_u64(in);
    model.hyper.batch = get_u64(in);
    model.hyper.learning_rate = get_f64(in);
    model.hyper.seed = get_u64(in);
    model.hyper.clip = get_f64(in);
    model.hyper.hidden = model.config.hidden;
    model.hyper.head_hidden = model.config.head_hidden;
    if (model.config.features != kForecastFeatureCount)
        throw DataError("model file has unsupported feature count");
    for (std::size_t f = 0; f < kForecastFeatureCount; ++f) {
        model.scaler.min_[f] = get_f64(in);
        model.scaler.max_[f] = get_f64(in);
        model.scaler.constant_[f] = get_u64(in) != 0;
    }
    const std::uint64_t count = get_u64(in);
    const ParamLayout lay(model.config);
    if (count != lay.total()) throw DataError("model file parameter count does not match shapes");
    model.params.resize(count);
    for (double& p : model.params) p = get_f64(in);
    return model;
}

void save_model_file(const ForecastModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open model file for writing: " + path);
    save_model(model, out);
    if (!out) throw DataError("failed writing model file: " + path);
}

ForecastModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    return load_model(in);
}

std::string train_report_json(const TrainReport& report) {
    nlohmann::ordered_json j;
    j["epoch_losses"] = report.epoch_losses;
    if (report.test_loss)
        j["test_loss"] = *report.test_loss;
    else
        j["test_loss"] = nullptr;
    j["epochs_run"] = report.epochs_run;
    j["seed"] = report.seed;
    j["diverged"] = report.diverged;
    return j.dump(2) + "\n";
}

std::string daily_series_csv(const DailySeries& series) {
    std::ostringstream out;
    CsvWriter writer(out);
    std::vector<std::string> header{"date"};
    for (const char* f : kForecastFeatureNames) header.push_back(f);
    header.push_back("gap");
    writer.write_row(header);
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        std::vector<std::string> row{format_day(series.day(i))};
        for (double v : series.rows[i]) row.push_back(format_double(v));
        row.push_back(series.gap[i] ? "1" : "0");
        writer.write_row(row);
    }
    return out.str();
}

std::string prediction_csv(std::int64_t first_day, const std::vector<FeatureRow>& forecast) {
    std::ostringstream out;
    CsvWriter writer(out);
    std::vector<std::string> header{"date"};
    for (const char* f : kForecastFeatureNames) header.push_back(f);
    writer.write_row(header);
    for (std::size_t s = 0; s < forecast.size(); ++s) {
        std::vector<std::string> row{format_day(first_day + static_cast<std::int64_t>(s))};
        for (double v : forecast[s]) row.push_back(format_double(v));
        writer.write_row(row);
    }
    return out.str();
}

}  // namespace tracekit
