#include "nlc/analysis/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "nlc/errors.hpp"

namespace nlc::analysis {

namespace {

constexpr std::size_t kMinSamples = 30;

void require_samples(std::span<const double> samples, const char* what) {
  if (samples.size() < kMinSamples)
    throw ConfigError(std::string(what) + ": need at least 30 samples, got " +
                      std::to_string(samples.size()));
}

/// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct KdeSetup {
  double h;
  double lo;
  double step;
};

KdeSetup setup(std::span<const double> samples, std::size_t grid_points) {
  require_samples(samples, "kde");
  if (grid_points < 2) throw ConfigError("kde: need at least 2 grid points");
  const double h = silverman_bandwidth(samples);
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 4.0 * h;
  const double hi = *mx + 4.0 * h;
  return {h, lo, (hi - lo) / static_cast<double>(grid_points - 1)};
}

double kernel_sum(std::span<const double> samples, double x, double h) {
  const double inv_h = 1.0 / h;
  double s = 0.0;
  for (const double v : samples) {
    const double d = (x - v) * inv_h;
    s += std::exp(-0.5 * d * d);
  }
  return s * inv_h / (static_cast<double>(samples.size()) * std::sqrt(2.0 * std::numbers::pi));
}

DensityEstimate empty(const KdeSetup& s, std::size_t grid_points) {
  DensityEstimate est;
  est.bandwidth = s.h;
  est.grid.resize(grid_points);
  est.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i)
    est.grid[i] = s.lo + static_cast<double>(i) * s.step;
  return est;
}

}  // namespace

double mean(std::span<const double> samples) {
  if (samples.empty()) throw ConfigError("mean: empty sample");
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double variance(std::span<const double> samples) {
  const double m = mean(samples);
  double s = 0.0;
  for (const double v : samples) s += (v - m) * (v - m);
  return s / static_cast<double>(samples.size());
}

double silverman_bandwidth(std::span<const double> samples) {
  require_samples(samples, "silverman_bandwidth");
  const double n = static_cast<double>(samples.size());
  const double sd = std::sqrt(variance(samples) * n / (n - 1.0));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0)) spread = sd;  // heavy ties at the quartiles
  if (!(spread > 0)) throw DegenerateSampleError("kde: samples have zero spread");
  return 0.9 * spread * std::pow(n, -0.2);
}

DensityEstimate kde(std::span<const double> samples, std::size_t grid_points) {
  const KdeSetup s = setup(samples, grid_points);
  auto est = empty(s, grid_points);
  const auto n = static_cast<std::ptrdiff_t>(grid_points);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    est.density[k] = kernel_sum(samples, est.grid[k], s.h);
  }
  return est;
}

namespace serial {

DensityEstimate kde(std::span<const double> samples, std::size_t grid_points) {
  const KdeSetup s = setup(samples, grid_points);
  auto est = empty(s, grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) est.density[k] = kernel_sum(samples, est.grid[k], s.h);
  return est;
}

}  // namespace serial

double kurtosis(std::span<const double> samples) {
  require_samples(samples, "kurtosis");
  const double m = mean(samples);
  double m2 = 0.0, m4 = 0.0;
  for (const double v : samples) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(samples.size());
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0)) throw DegenerateSampleError("kurtosis: zero variance");
  return m4 / (m2 * m2);
}

}  // namespace nlc::analysis
