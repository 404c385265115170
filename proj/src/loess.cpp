#include "tracekit/loess.hpp"

#include "tracekit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracekit {

namespace {

inline double tricube(double u) {
    if (u >= 1.0) return 0.0;
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

}  // namespace

double loess_fit_at(std::span<const double> y, std::span<const double> robustness,
                    std::size_t window, double x) {
    const std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("loess: empty series");
    if (!robustness.empty() && robustness.size() != n)
        throw std::invalid_argument("loess: robustness length mismatch");
    if (n == 1) return y[0];

    const std::size_t q = std::min(window, n);
    // Contiguous block of the q nearest positions to x.
    std::size_t lo = 0;
    if (x > 0) {
        lo = static_cast<std::size_t>(std::min<double>(
            std::max(0.0, std::floor(x) - static_cast<double>(q - 1) / 2),
            static_cast<double>(n - q)));
    }
    while (lo > 0 &&
           x - static_cast<double>(lo - 1) < static_cast<double>(lo + q - 1) - x)
        --lo;
    while (lo + q < n &&
           static_cast<double>(lo + q) - x < x - static_cast<double>(lo))
        ++lo;

    double h = std::max(x - static_cast<double>(lo), static_cast<double>(lo + q - 1) - x);
    if (window > n) h *= static_cast<double>(window) / static_cast<double>(n);
    if (h <= 0) h = 1.0;

    double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
    for (std::size_t i = lo; i < lo + q; ++i) {
        const double t = static_cast<double>(i) - x;
        double w = tricube(std::abs(t) / h);
        if (!robustness.empty()) w *= robustness[i];
        if (w <= 0) continue;
        sw += w;
        swx += w * t;
        swxx += w * t * t;
        swy += w * y[i];
        swxy += w * t * y[i];
    }
    if (sw <= 0) {
        // All weights vanished (aggressive robustness); plain window mean.
        double s = 0;
        for (std::size_t i = lo; i < lo + q; ++i) s += y[i];
        return s / static_cast<double>(q);
    }
    const double det = sw * swxx - swx * swx;
    if (std::abs(det) <= 1e-12 * sw * swxx || det == 0) return swy / sw;
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swy - slope * swx) / sw;
    return intercept;  // evaluated at t = 0
}

namespace serial {

std::vector<double> loess_smooth(std::span<const double> y,
                                 std::span<const double> robustness, std::size_t window) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = loess_fit_at(y, robustness, window, static_cast<double>(i));
    return out;
}

}  // namespace serial

std::vector<double> loess_smooth(std::span<const double> y,
                                 std::span<const double> robustness, std::size_t window) {
    std::vector<double> out(y.size());
    kernels::for_index(y.size(), [&](std::size_t i) {
        out[i] = loess_fit_at(y, robustness, window, static_cast<double>(i));
    });
    return out;
}

}  // namespace tracekit
