// Times the OpenMP kernels against their serial references.

#include "tracekit/clustering.hpp"
#include "tracekit/forecast.hpp"
#include "tracekit/kernels.hpp"
#include "tracekit/loess.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Fn>
double time_best_of(int repeats, Fn&& fn) {
    double best = 1e100;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-24s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel timings run the serial path\n\n");
#endif

    std::mt19937_64 rng(7);
    auto unit = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    {
        const std::size_t n = 200000, d = 3, k = 16;
        std::vector<double> points(n * d), centroids(k * d);
        for (double& v : points) v = unit();
        for (double& v : centroids) v = unit();
        std::vector<std::uint32_t> assign_s(n), assign_p(n);
        std::vector<double> dist_s(n), dist_p(n);

        const double serial = time_best_of(5, [&] {
            tracekit::kernels::serial::assign_nearest(points.data(), n, d, centroids.data(), k,
                                                      assign_s.data(), dist_s.data());
        });
        const double parallel = time_best_of(5, [&] {
            tracekit::kernels::assign_nearest(points.data(), n, d, centroids.data(), k,
                                              assign_p.data(), dist_p.data());
        });
        report("kmeans assignment", serial, parallel);
        if (assign_s != assign_p) std::printf("  !! kernel outputs differ\n");
    }

    {
        const std::size_t n = 20000, window = 401;
        std::vector<double> y(n);
        for (double& v : y) v = unit();

        const double serial =
            time_best_of(3, [&] { (void)tracekit::serial::loess_smooth(y, {}, window); });
        const double parallel =
            time_best_of(3, [&] { (void)tracekit::loess_smooth(y, {}, window); });
        report("loess smoothing", serial, parallel);
    }

    {
        // LSTM batch gradients; the parallel path fans samples out over
        // threads, the serial numbers come from a single-sample loop.
        tracekit::ModelConfig cfg;
        cfg.hidden = 200;
        cfg.head_hidden = 100;
        tracekit::TrainOptions opts;
        opts.hidden = cfg.hidden;
        opts.head_hidden = cfg.head_hidden;
        tracekit::FeatureScaler scaler;
        tracekit::ForecastModel model = tracekit::init_model(cfg, opts, scaler);

        const std::size_t batch = 16;
        std::vector<double> inputs(batch * cfg.input_len * cfg.features);
        std::vector<double> targets(batch * cfg.output_len * cfg.features);
        for (double& v : inputs) v = unit();
        for (double& v : targets) v = unit();
        const std::size_t in_stride = cfg.input_len * cfg.features;
        const std::size_t out_stride = cfg.output_len * cfg.features;
        const tracekit::ParamLayout lay(cfg);
        std::vector<std::vector<double>> grads(batch, std::vector<double>(lay.total()));
        std::vector<double> losses(batch);

        auto one_sample = [&](std::size_t b) {
            tracekit::sample_gradient(
                model, {inputs.data() + b * in_stride, in_stride},
                {targets.data() + b * out_stride, out_stride}, grads[b], &losses[b]);
        };
        const double serial = time_best_of(3, [&] {
            for (std::size_t b = 0; b < batch; ++b) one_sample(b);
        });
        const double parallel = time_best_of(3, [&] {
            tracekit::kernels::for_index(batch, one_sample);
        });
        report("lstm batch gradient", serial, parallel);
    }

    return 0;
}
