#include "tracekit/forecast.hpp"

#include "tracekit/error.hpp"
#include "tracekit/time_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace tracekit;

namespace {

DatedJob usage_job(std::int64_t day, double rss, double stime, double utime, double gsecs) {
    DatedJob j;
    j.trace.start_time = day * 86400 + 3600;
    j.trace.max_rss = rss;
    j.trace.stime = stime;
    j.trace.utime = utime;
    j.trace.gpu_secs = gsecs;
    return j;
}

ForecastModel tiny_model(std::uint64_t seed, std::size_t hidden = 3, std::size_t head = 2,
                         std::size_t input_len = 4, std::size_t output_len = 2) {
    ModelConfig cfg;
    cfg.hidden = hidden;
    cfg.head_hidden = head;
    cfg.input_len = input_len;
    cfg.output_len = output_len;
    TrainOptions opts;
    opts.seed = seed;
    opts.hidden = hidden;
    opts.head_hidden = head;
    return init_model(cfg, opts, FeatureScaler{});
}

std::vector<double> random_input(std::mt19937_64& rng, const ModelConfig& cfg) {
    std::vector<double> v(cfg.input_len * cfg.features);
    for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return v;
}

}  // namespace

TEST_CASE("daily aggregate sums per day and flags gaps") {
    auto series = daily_aggregate({usage_job(100, 1, 2, 3, 10), usage_job(100, 9, 8, 7, 20),
                                   usage_job(102, 5, 5, 5, 5)});
    REQUIRE(series.rows.size() == 3);
    CHECK(series.rows[0][3] == 30.0);
    CHECK(series.rows[0][0] == 10.0);
    CHECK(series.rows[1][0] == 0.0);
    CHECK(series.gap[1]);
    CHECK_FALSE(series.gap[0]);
    CHECK_THROWS_AS(daily_aggregate({}), DataError);
}

TEST_CASE("daily aggregate matches brute-force sums on a random fixture") {
    std::mt19937_64 rng(88);
    std::vector<DatedJob> jobs;
    for (int i = 0; i < 500; ++i) {
        jobs.push_back(usage_job(16436 + static_cast<std::int64_t>(rng() % 90),
                                 static_cast<double>(rng() % 1000), static_cast<double>(rng() % 100),
                                 static_cast<double>(rng() % 100), static_cast<double>(rng() % 50)));
    }
    auto series = daily_aggregate(jobs);
    for (std::size_t d = 0; d < series.rows.size(); ++d) {
        FeatureRow expected{};
        for (const DatedJob& j : jobs) {
            if (epoch_day(j.start_time()) != series.day(d)) continue;
            expected[0] += *j.trace.max_rss;
            expected[1] += *j.trace.stime;
            expected[2] += *j.trace.utime;
            expected[3] += *j.trace.gpu_secs;
        }
        for (std::size_t f = 0; f < kForecastFeatureCount; ++f)
            CHECK(series.rows[d][f] == doctest::Approx(expected[f]).epsilon(1e-12));
    }
}

TEST_CASE("scaler maps min-max to the unit interval and round-trips") {
    std::vector<FeatureRow> rows = {{0, 1, 7, 7}, {5, 2, 7, 8}, {10, 3, 7, 9}};
    FeatureScaler s = FeatureScaler::fit(rows);
    FeatureRow mid = s.transform({5, 2, 7, 8});
    CHECK(mid[0] == doctest::Approx(0.5));
    CHECK(mid[1] == doctest::Approx(0.5));
    CHECK(mid[2] == 0.0);  // constant feature
    CHECK(s.constant(2));

    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        FeatureRow x{static_cast<double>(rng() % 1000) / 99.0, static_cast<double>(rng() % 7),
                     3.25, static_cast<double>(rng() % 19)};
        FeatureRow back = s.inverse(s.transform(x));
        CHECK(std::abs(back[0] - x[0]) < 1e-9);
        CHECK(std::abs(back[1] - x[1]) < 1e-9);
        CHECK(std::abs(back[3] - x[3]) < 1e-9);
    }

    // values beyond the fitted range are not clamped
    CHECK(s.transform({20, 0, 0, 0})[0] > 1.0);
}

TEST_CASE("window framing") {
    std::vector<FeatureRow> series(37, FeatureRow{1, 2, 3, 4});
    WindowedDataset ds = make_windows(series);
    CHECK(ds.count == 1);

    series.resize(40, FeatureRow{1, 2, 3, 4});
    CHECK(make_windows(series).count == 4);

    series.resize(36);
    CHECK_THROWS_AS(make_windows(series), DataError);
}

TEST_CASE("window targets are exactly the rows after the inputs") {
    std::mt19937_64 rng(21);
    std::vector<FeatureRow> series(60);
    for (FeatureRow& row : series)
        for (double& v : row) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    WindowedDataset ds = make_windows(series);
    for (std::size_t i = 0; i < ds.count; ++i) {
        auto target = ds.target(i);
        for (std::size_t s = 0; s < ds.output_len; ++s)
            for (std::size_t f = 0; f < kForecastFeatureCount; ++f)
                CHECK(target[s * kForecastFeatureCount + f] == series[i + 30 + s][f]);
    }
}

TEST_CASE("split proportions and determinism") {
    std::vector<FeatureRow> series(46);  // 10 windows
    for (std::size_t i = 0; i < series.size(); ++i) series[i].fill(static_cast<double>(i));
    WindowedDataset ds = make_windows(series);
    REQUIRE(ds.count == 10);

    auto [train1, test1] = split_shuffle(ds, 0.8, 99);
    CHECK(train1.count == 8);
    CHECK(test1.count == 2);
    auto [train2, test2] = split_shuffle(ds, 0.8, 99);
    CHECK(train1.start_rows == train2.start_rows);
    CHECK(test1.start_rows == test2.start_rows);

    // disjoint and covering
    std::vector<bool> seen(ds.count, false);
    for (std::size_t s : train1.start_rows) seen[s] = true;
    for (std::size_t s : test1.start_rows) {
        CHECK_FALSE(seen[s]);
        seen[s] = true;
    }
    for (bool b : seen) CHECK(b);

    std::vector<FeatureRow> five(41);
    for (std::size_t i = 0; i < five.size(); ++i) five[i].fill(static_cast<double>(i));
    auto [train5, test5] = split_shuffle(make_windows(five), 0.8, 1);
    CHECK(train5.count == 4);
    CHECK(test5.count == 1);
}

TEST_CASE("all-zero parameters produce all-zero output of shape 7x4") {
    ForecastModel model = tiny_model(1, 4, 3, 30, 7);
    std::fill(model.params.begin(), model.params.end(), 0.0);
    std::mt19937_64 rng(2);
    auto out = model_forward(model, random_input(rng, model.config));
    REQUIRE(out.size() == 7 * 4);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward equals a step-by-step scalar trace on a tiny model") {
    // hidden 1, head 1: the whole network is scalar arithmetic
    ForecastModel model = tiny_model(5, 1, 1, 3, 2);
    std::vector<double> input = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 0.0, 0.5};
    const ParamLayout lay(model.config);

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    double h = 0, c = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        const double* x = input.data() + t * 4;
        double a[4];
        for (std::size_t g = 0; g < 4; ++g) {
            a[g] = model.params[lay.bias(g, 0)] + model.params[lay.wh(g, 0, 0)] * h;
            for (std::size_t f = 0; f < 4; ++f) a[g] += model.params[lay.wx(g, 0, f)] * x[f];
        }
        const double gi = sigmoid(a[0]), gf = sigmoid(a[1]), gg = std::tanh(a[2]),
                     go = sigmoid(a[3]);
        c = gf * c + gi * gg;
        h = go * std::tanh(c);
    }
    std::array<double, 4> expected;
    for (std::size_t k = 0; k < 4; ++k) {
        const double z1 = model.params[lay.b1(k, 0)] + model.params[lay.w1(k, 0, 0)] * h;
        const double r = z1 > 0 ? z1 : 0;
        expected[k] = model.params[lay.b2(k)] + model.params[lay.w2(k, 0)] * r;
    }

    auto out = model_forward(model, input);
    REQUIRE(out.size() == 2 * 4);
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(out[s * 4 + k] == doctest::Approx(expected[k]).epsilon(1e-12));
}

TEST_CASE("mse basics and oracle") {
    CHECK(mse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
    CHECK_THROWS_AS(mse(std::vector<double>{1}, std::vector<double>{1, 2}),
                    std::invalid_argument);

    std::mt19937_64 rng(6);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 1 + rng() % 50;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<double>(rng() % 1000) / 7.0;
            b[i] = static_cast<double>(rng() % 1000) / 7.0;
        }
        double expected = 0;
        for (std::size_t i = 0; i < n; ++i) expected += (a[i] - b[i]) * (a[i] - b[i]);
        expected /= static_cast<double>(n);
        CHECK(mse(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("gradient check on random tiny models") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 5; ++round) {
        ForecastModel model = tiny_model(1000 + round, 2 + round % 4, 2, 5, 3);
        std::vector<double> input = random_input(rng, model.config);
        std::vector<double> target(model.config.output_len * model.config.features);
        for (double& v : target) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        CHECK(gradient_check(model, input, target) < 1e-4);
    }
}

TEST_CASE("zero model with zero target has exactly zero gradients") {
    ForecastModel model = tiny_model(3, 2, 2, 4, 2);
    std::fill(model.params.begin(), model.params.end(), 0.0);
    std::vector<double> input(model.config.input_len * model.config.features, 0.25);
    std::vector<double> target(model.config.output_len * model.config.features, 0.0);
    std::vector<double> grad(model.params.size());
    double loss = -1;
    sample_gradient(model, input, target, grad, &loss);
    CHECK(loss == 0.0);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("a head with dead rectifiers gets no dense-1 gradient") {
    ForecastModel model = tiny_model(9, 3, 2, 4, 2);
    const ParamLayout lay(model.config);
    // drive head 0 pre-activations far negative
    for (std::size_t j = 0; j < model.config.head_hidden; ++j)
        model.params[lay.b1(0, j)] = -100.0;

    std::mt19937_64 rng(4);
    std::vector<double> input = random_input(rng, model.config);
    std::vector<double> target(model.config.output_len * model.config.features, 0.5);
    std::vector<double> grad(model.params.size());
    sample_gradient(model, input, target, grad, nullptr);

    for (std::size_t j = 0; j < model.config.head_hidden; ++j) {
        CHECK(grad[lay.b1(0, j)] == 0.0);
        CHECK(grad[lay.w2(0, j)] == 0.0);  // r = 0 kills the product
        for (std::size_t u = 0; u < model.config.hidden; ++u)
            CHECK(grad[lay.w1(0, j, u)] == 0.0);
    }
    CHECK(grad[lay.b2(0)] != 0.0);  // the bias path bypasses the rectifier
}

TEST_CASE("heads are independent: perturbing head j leaves head k bit-identical") {
    ForecastModel model = tiny_model(77, 5, 3, 6, 4);
    std::mt19937_64 rng(13);
    std::vector<double> input = random_input(rng, model.config);
    auto base = model_forward(model, input);

    const ParamLayout lay(model.config);
    ForecastModel poked = model;
    for (std::size_t j = 0; j < model.config.head_hidden; ++j) {
        poked.params[lay.b1(2, j)] += 0.37;
        poked.params[lay.w2(2, j)] -= 0.11;
    }
    poked.params[lay.b2(2)] += 1.5;
    auto out = model_forward(poked, input);
    for (std::size_t s = 0; s < model.config.output_len; ++s) {
        for (std::size_t k = 0; k < model.config.features; ++k) {
            if (k == 2) continue;
            CHECK(out[s * 4 + k] == base[s * 4 + k]);
        }
        CHECK(out[s * 4 + 2] != base[s * 4 + 2]);
    }
}

TEST_CASE("training is deterministic and loss improves on a learnable fixture") {
    // tiny supervised problem: predict a constant pattern
    std::mt19937_64 rng(40);
    std::vector<FeatureRow> series(80);
    for (std::size_t i = 0; i < series.size(); ++i)
        for (std::size_t f = 0; f < 4; ++f)
            series[i][f] = 0.5 + 0.4 * std::sin(0.2 * static_cast<double>(i) + f);
    WindowedDataset ds = make_windows(series);
    auto [train_set, test_set] = split_shuffle(ds, 0.8, 7);

    TrainOptions opts;
    opts.epochs = 5;
    opts.batch = 8;
    opts.hidden = 8;
    opts.head_hidden = 4;
    opts.seed = 123;

    auto [model1, report1] = train(train_set, test_set, FeatureScaler{}, opts);
    auto [model2, report2] = train(train_set, test_set, FeatureScaler{}, opts);
    CHECK(model1.params == model2.params);  // bit-identical trajectories
    CHECK(report1.epoch_losses == report2.epoch_losses);
    REQUIRE(report1.epoch_losses.size() == 5);
    CHECK(report1.epoch_losses.back() <= report1.epoch_losses.front());
    REQUIRE(report1.test_loss.has_value());
    for (double p : model1.params) CHECK(std::isfinite(p));
}

TEST_CASE("predict scales in, forwards, scales out") {
    std::vector<FeatureRow> rows(40);
    std::mt19937_64 rng(9);
    for (FeatureRow& r : rows)
        for (double& v : r) v = static_cast<double>(rng() % 1000);
    FeatureScaler scaler = FeatureScaler::fit(rows);

    ForecastModel model = tiny_model(2, 3, 2, 30, 7);
    model.scaler = scaler;

    auto forecast = predict(model, std::span<const FeatureRow>(rows.data(), 30));
    CHECK(forecast.size() == 7);
    for (const FeatureRow& row : forecast)
        for (double v : row) CHECK(std::isfinite(v));

    CHECK_THROWS_AS(predict(model, std::span<const FeatureRow>(rows.data(), 29)),
                    std::invalid_argument);
}

TEST_CASE("identity harness: a forced-echo forward round-trips the scaler") {
    // dead recurrent/head path, output biased to the scaled last input row:
    // with b2 = scaled value the prediction inverts to the raw row exactly
    std::vector<FeatureRow> rows(31);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t f = 0; f < 4; ++f) rows[i][f] = 10.0 * static_cast<double>(i + f + 1);
    FeatureScaler scaler = FeatureScaler::fit(rows);

    ForecastModel model = tiny_model(4, 2, 2, 30, 7);
    std::fill(model.params.begin(), model.params.end(), 0.0);
    model.scaler = scaler;
    const ParamLayout lay(model.config);
    const FeatureRow echoed = scaler.transform(rows[29]);
    for (std::size_t k = 0; k < 4; ++k) model.params[lay.b2(k)] = echoed[k];

    auto forecast = predict(model, std::span<const FeatureRow>(rows.data(), 30));
    for (const FeatureRow& row : forecast)
        for (std::size_t f = 0; f < 4; ++f)
            CHECK(row[f] == doctest::Approx(rows[29][f]).epsilon(1e-9));
}

TEST_CASE("model serialization round-trips bit-exactly") {
    ForecastModel model = tiny_model(31, 4, 3, 12, 5);
    std::vector<FeatureRow> rows(20);
    std::mt19937_64 rng(14);
    for (FeatureRow& r : rows)
        for (double& v : r) v = static_cast<double>(rng() % 10000) / 7.0;
    model.scaler = FeatureScaler::fit(rows);

    std::stringstream buffer;
    save_model(model, buffer);
    ForecastModel loaded = load_model(buffer);
    CHECK(loaded.params == model.params);
    CHECK(loaded.config.hidden == model.config.hidden);
    CHECK(loaded.config.input_len == model.config.input_len);
    CHECK(loaded.scaler.min_ == model.scaler.min_);
    CHECK(loaded.scaler.max_ == model.scaler.max_);
    CHECK(loaded.hyper.seed == model.hyper.seed);

    std::stringstream bad("definitely not a model");
    CHECK_THROWS_AS(load_model(bad), DataError);
}
