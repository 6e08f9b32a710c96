#pragma once

#include <span>
#include <vector>

#include "nlc/analysis/estimates.hpp"

namespace nlc::analysis {

enum class Window { None, Hann };

/// Mean periodogram |DFT(x - xbar)|^2 dt / N of equally long paths, on
/// w_k = 2 pi k / (N dt), k = 0..N/2. With a window, N is replaced by sum w^2.
PsdEstimate averaged_periodogram(std::span<const std::vector<double>> paths, double dt,
                                 Window window = Window::None);

namespace serial {
PsdEstimate averaged_periodogram(std::span<const std::vector<double>> paths, double dt,
                                 Window window = Window::None);
}  // namespace serial

/// Variance implied by a two-sided density reported on w >= 0:
/// (1/pi) * trapezoid integral over the grid.
double variance_from_psd(const PsdEstimate& psd);

}  // namespace nlc::analysis
