#include "nlc/analysis/periodogram.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "fftw_plan.hpp"
#include "nlc/errors.hpp"

namespace nlc::analysis {

namespace {

struct Setup {
  std::size_t n = 0;
  std::vector<double> window;  // empty for no window
  double norm = 0.0;           // dt / sum w^2
};

Setup prepare(std::span<const std::vector<double>> paths, double dt, Window window) {
  if (paths.empty()) throw ConfigError("averaged_periodogram: empty ensemble");
  if (!(dt > 0)) throw ConfigError("averaged_periodogram: dt must be positive");
  Setup s;
  s.n = paths.front().size();
  if (s.n < 2) throw ConfigError("averaged_periodogram: paths need at least 2 samples");
  for (const auto& p : paths)
    if (p.size() != s.n) throw ConfigError("averaged_periodogram: paths differ in length");
  double sumsq = static_cast<double>(s.n);
  if (window == Window::Hann) {
    s.window.resize(s.n);
    sumsq = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                             static_cast<double>(s.n - 1)));
      s.window[i] = w;
      sumsq += w * w;
    }
  }
  s.norm = dt / sumsq;
  return s;
}

PsdEstimate empty_estimate(std::size_t n, double dt) {
  PsdEstimate est;
  const std::size_t bins = n / 2 + 1;
  est.omegas.resize(bins);
  est.values.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k)
    est.omegas[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * dt);
  return est;
}

/// Adds |DFT|^2 * norm of one mean-removed (and windowed) path into acc.
void accumulate_path(const detail::RealFft& fft, const Setup& s, const std::vector<double>& path,
                     std::vector<double>& buf, std::vector<std::complex<double>>& spec,
                     std::vector<double>& acc) {
  const double m = std::accumulate(path.begin(), path.end(), 0.0) / static_cast<double>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    buf[i] = path[i] - m;
    if (!s.window.empty()) buf[i] *= s.window[i];
  }
  fft.execute(buf, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) acc[k] += std::norm(spec[k]) * s.norm;
}

}  // namespace

PsdEstimate averaged_periodogram(std::span<const std::vector<double>> paths, double dt,
                                 Window window) {
  const Setup s = prepare(paths, dt, window);
  auto est = empty_estimate(s.n, dt);
  const detail::RealFft fft(s.n);
  const auto count = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel
  {
    std::vector<double> buf(s.n), acc(est.values.size(), 0.0);
    std::vector<std::complex<double>> spec(est.values.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < count; ++p)
      accumulate_path(fft, s, paths[static_cast<std::size_t>(p)], buf, spec, acc);
#pragma omp critical(nlc_periodogram_reduce)
    for (std::size_t k = 0; k < acc.size(); ++k) est.values[k] += acc[k];
  }
  for (double& v : est.values) v /= static_cast<double>(paths.size());
  return est;
}

namespace serial {

PsdEstimate averaged_periodogram(std::span<const std::vector<double>> paths, double dt,
                                 Window window) {
  const Setup s = prepare(paths, dt, window);
  auto est = empty_estimate(s.n, dt);
  const detail::RealFft fft(s.n);
  std::vector<double> buf(s.n);
  std::vector<std::complex<double>> spec(est.values.size());
  for (const auto& path : paths) accumulate_path(fft, s, path, buf, spec, est.values);
  for (double& v : est.values) v /= static_cast<double>(paths.size());
  return est;
}

}  // namespace serial

double variance_from_psd(const PsdEstimate& psd) {
  double integral = 0.0;
  for (std::size_t k = 1; k < psd.size(); ++k)
    integral += 0.5 * (psd.values[k] + psd.values[k - 1]) * (psd.omegas[k] - psd.omegas[k - 1]);
  return integral / std::numbers::pi;
}

}  // namespace nlc::analysis
