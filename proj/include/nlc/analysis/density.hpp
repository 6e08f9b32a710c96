#pragma once

#include <cstddef>
#include <span>

#include "nlc/analysis/estimates.hpp"

namespace nlc::analysis {

/// Silverman's rule of thumb 0.9 min(sd, IQR/1.34) N^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian kernel density on `grid_points` points spanning [min - 4h, max + 4h].
/// Needs >= 30 samples; DegenerateSampleError for zero spread.
DensityEstimate kde(std::span<const double> samples, std::size_t grid_points = 512);

namespace serial {
DensityEstimate kde(std::span<const double> samples, std::size_t grid_points = 512);
}  // namespace serial

/// Non-excess kurtosis m4 / m2^2 (>= 30 samples).
double kurtosis(std::span<const double> samples);

double mean(std::span<const double> samples);
/// Biased (1/N) variance.
double variance(std::span<const double> samples);

}  // namespace nlc::analysis
