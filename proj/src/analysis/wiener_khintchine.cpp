#include "nlc/analysis/wiener_khintchine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "nlc/analysis/templates.hpp"
#include "nlc/errors.hpp"

namespace nlc::analysis {

namespace {

constexpr std::size_t kBlock = 4096;

double max_abs_omega(std::span<const double> omegas) {
  double m = 0.0;
  for (const double w : omegas) m = std::max(m, std::abs(w));
  return m;
}

/// Trapezoid 2 int_0^U f(u) cos(w u) du on the uniform nodes f_k = f(k du).
PsdEstimate cosine_sum(const std::vector<double>& f, double du, std::span<const double> omegas) {
  PsdEstimate est;
  est.omegas.assign(omegas.begin(), omegas.end());
  est.values.assign(omegas.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());
  const std::size_t last = f.size() - 1;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double w = omegas[static_cast<std::size_t>(i)];
    const std::complex<double> rot = std::polar(1.0, w * du);
    std::complex<double> z = 1.0;
    double s = 0.5 * (f[0] + f[last] * std::cos(w * static_cast<double>(last) * du));
    for (std::size_t k = 1; k < last; ++k) {
      if (k % 1024 == 0) z = std::polar(1.0, w * static_cast<double>(k) * du);
      else z *= rot;
      s += f[k] * z.real();
    }
    est.values[static_cast<std::size_t>(i)] = 2.0 * du * s;
  }
  return est;
}

}  // namespace

PsdEstimate wk_transform(const std::function<double(double)>& acv, std::span<const double> omegas,
                         const WkOptions& options) {
  if (omegas.empty()) throw ConfigError("wk_transform: empty frequency grid");
  if (!(options.cutoff > 0) || !(options.max_lag > 0))
    throw ConfigError("wk_transform: cutoff and max_lag must be positive");
  double du = options.du;
  if (du == 0.0) du = std::numbers::pi / (32.0 * std::max(max_abs_omega(omegas), 1.0));
  if (!(du > 0)) throw ConfigError("wk_transform: du must be positive");

  std::vector<double> f;
  f.reserve(kBlock);
  double reference = 0.0;
  for (std::size_t k = 0; k < kBlock; ++k) {
    f.push_back(acv(static_cast<double>(k) * du));
    reference = std::max(reference, std::abs(f.back()));
  }
  if (reference == 0.0) {
    PsdEstimate zero;
    zero.omegas.assign(omegas.begin(), omegas.end());
    zero.values.assign(omegas.size(), 0.0);
    return zero;
  }
  const double threshold = options.cutoff * reference;
  for (;;) {
    const std::size_t start = f.size();
    if (static_cast<double>(start) * du > options.max_lag || start + kBlock > options.max_samples)
      throw NumericalError("wk_transform: autocovariance does not decay within lag " +
                           std::to_string(static_cast<double>(start) * du));
    double block_max = 0.0;
    for (std::size_t k = 0; k < kBlock; ++k) {
      f.push_back(acv(static_cast<double>(start + k) * du));
      if (!std::isfinite(f.back())) throw NumericalError("wk_transform: non-finite autocovariance");
      block_max = std::max(block_max, std::abs(f.back()));
    }
    if (block_max < threshold) break;
  }
  return cosine_sum(f, du, omegas);
}

PsdEstimate wk_transform(const AcvEstimate& acv, std::span<const double> omegas) {
  if (acv.size() < 2) throw ConfigError("wk_transform: need at least 2 lags");
  PsdEstimate est;
  est.omegas.assign(omegas.begin(), omegas.end());
  est.values.assign(omegas.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double w = omegas[static_cast<std::size_t>(i)];
    double s = 0.0;
    double prev = acv.values[0] * std::cos(w * acv.lags[0]);
    for (std::size_t k = 1; k < acv.size(); ++k) {
      const double cur = acv.values[k] * std::cos(w * acv.lags[k]);
      s += 0.5 * (prev + cur) * (acv.lags[k] - acv.lags[k - 1]);
      prev = cur;
    }
    est.values[static_cast<std::size_t>(i)] = 2.0 * s;
  }
  return est;
}

PsdEstimate wk_transform(const hopf::HopfParams& p, std::span<const double> omegas) {
  p.validate();
  if (p.sigma == 0.0)
    throw NumericalError("wk_transform: sigma = 0 autocovariance does not decay");
  const double s = (p.sigma / p.r) * (p.sigma / p.r);
  const double fastest = std::max({max_abs_omega(omegas), p.alpha, 1e-300});
  WkOptions opts;
  opts.du = std::min(std::numbers::pi / (32.0 * fastest), 1.0 / (32.0 * (p.lambda + 0.5 * s)));
  return wk_transform([&p](double u) { return acv_formula(p, u); }, omegas, opts);
}

}  // namespace nlc::analysis
