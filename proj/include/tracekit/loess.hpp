#pragma once

#include <span>
#include <vector>

namespace tracekit {

// Locally weighted linear regression over a regularly spaced sequence
// (positions 0..n-1). Tricube neighborhood weights times optional robustness
// weights; when the window exceeds the series the distance scale is inflated
// by window/n. Degenerate fits fall back to the weighted mean.
double loess_fit_at(std::span<const double> y, std::span<const double> robustness,
                    std::size_t window, double x);

namespace serial {
// Reference smoother: loess_fit_at at every integer position, one by one.
std::vector<double> loess_smooth(std::span<const double> y,
                                 std::span<const double> robustness, std::size_t window);
}  // namespace serial

// Parallel smoother; bitwise-identical to the serial reference.
std::vector<double> loess_smooth(std::span<const double> y,
                                 std::span<const double> robustness, std::size_t window);

}  // namespace tracekit
