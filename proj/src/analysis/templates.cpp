#include "nlc/analysis/templates.hpp"

#include <cmath>

#include "nlc/errors.hpp"

namespace nlc::analysis {

double acv_formula(const hopf::HopfParams& p, double u) {
  p.validate();
  const double a = std::abs(u);
  const double n = hopf::nsr(p);
  const double s = (p.sigma / p.r) * (p.sigma / p.r);
  return 0.5 * p.r * p.r * (1.0 + n * n * std::exp(-p.lambda * a)) * std::cos(p.alpha * u) *
         std::exp(-0.5 * a * s);
}

namespace {

double lorentz_pair(double r, double alpha, double omega, double b) {
  const double b2 = b * b;
  const double dm = 4.0 * (alpha - omega) * (alpha - omega) + b2;
  const double dp = 4.0 * (alpha + omega) * (alpha + omega) + b2;
  return 2.0 * r * r * b * (4.0 * (alpha * alpha + omega * omega) + b2) / (dm * dp);
}

}  // namespace

double psd_formula(const hopf::HopfParams& p, double omega) {
  p.validate();
  if (p.sigma == 0.0)
    throw DomainError("psd_formula: sigma = 0 gives a line spectrum at +-alpha, not a density");
  const double n = hopf::nsr(p);
  const double s = (p.sigma / p.r) * (p.sigma / p.r);
  return lorentz_pair(p.r, p.alpha, omega, s) +
         n * n * lorentz_pair(p.r, p.alpha, omega, s + 2.0 * p.lambda);
}

AcvEstimate acv_curve(const hopf::HopfParams& p, std::span<const double> lags) {
  AcvEstimate est;
  est.lags.assign(lags.begin(), lags.end());
  est.values.reserve(lags.size());
  for (const double u : lags) est.values.push_back(acv_formula(p, u));
  return est;
}

PsdEstimate psd_curve(const hopf::HopfParams& p, std::span<const double> omegas) {
  PsdEstimate est;
  est.omegas.assign(omegas.begin(), omegas.end());
  est.values.reserve(omegas.size());
  for (const double w : omegas) est.values.push_back(psd_formula(p, w));
  return est;
}

std::vector<double> uniform_grid(double step, std::size_t count) {
  if (!(step > 0)) throw ConfigError("grid step must be positive");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = static_cast<double>(i) * step;
  return g;
}

}  // namespace nlc::analysis
