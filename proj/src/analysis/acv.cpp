#include "nlc/analysis/acv.hpp"

#include <cmath>
#include <complex>
#include <numeric>

#include "fftw_plan.hpp"
#include "nlc/errors.hpp"

namespace nlc::analysis {

namespace {

std::size_t lag_count(std::size_t n, double dt, double max_lag) {
  if (!(dt > 0)) throw ConfigError("sample_acv: dt must be positive");
  if (!(max_lag >= 0)) throw ConfigError("sample_acv: max_lag must be >= 0");
  if (n < 2) throw ConfigError("sample_acv: need at least 2 samples");
  const auto k = static_cast<std::size_t>(std::llround(max_lag / dt));
  if (2 * k > n)
    throw ConfigError("sample_acv: max_lag exceeds N dt / 2 (N = " + std::to_string(n) + ")");
  return k;
}

std::vector<double> centred(std::span<const double> x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - m;
  return out;
}

AcvEstimate make_grid(std::size_t k, double dt) {
  AcvEstimate est;
  est.lags.resize(k + 1);
  est.values.resize(k + 1);
  for (std::size_t i = 0; i <= k; ++i) est.lags[i] = static_cast<double>(i) * dt;
  return est;
}

double lag_sum(const std::vector<double>& c, std::size_t lag) {
  double s = 0.0;
  const std::size_t n = c.size() - lag;
  const double* a = c.data();
  const double* b = c.data() + lag;
  for (std::size_t t = 0; t < n; ++t) s += a[t] * b[t];
  return s;
}

AcvEstimate direct(std::span<const double> series, double dt, std::size_t k) {
  const auto c = centred(series);
  auto est = make_grid(k, dt);
  const double n = static_cast<double>(c.size());
  const auto lags = static_cast<std::ptrdiff_t>(k + 1);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t lag = 0; lag < lags; ++lag) {
    est.values[static_cast<std::size_t>(lag)] = lag_sum(c, static_cast<std::size_t>(lag)) / n;
  }
  return est;
}

AcvEstimate via_fft(std::span<const double> series, double dt, std::size_t k) {
  auto c = centred(series);
  const std::size_t n = c.size();
  std::size_t nfft = 1;
  while (nfft < 2 * n) nfft <<= 1;
  c.resize(nfft, 0.0);
  std::vector<std::complex<double>> spec(nfft / 2 + 1);
  detail::RealFft(nfft).execute(c, spec);
  for (auto& z : spec) z = std::norm(z);
  std::vector<double> corr(nfft);
  detail::InverseRealFft(nfft).execute(spec, corr);
  auto est = make_grid(k, dt);
  const double scale = 1.0 / (static_cast<double>(nfft) * static_cast<double>(n));
  for (std::size_t i = 0; i <= k; ++i) est.values[i] = corr[i] * scale;
  return est;
}

}  // namespace

AcvEstimate sample_acv(std::span<const double> series, double dt, double max_lag, AcvMethod method) {
  const std::size_t k = lag_count(series.size(), dt, max_lag);
  if (method == AcvMethod::Auto) {
    const double n = static_cast<double>(series.size());
    const double direct_cost = n * static_cast<double>(k + 1);
    const double fft_cost = 30.0 * n * std::log2(2.0 * n + 2.0);
    method = direct_cost <= fft_cost ? AcvMethod::Direct : AcvMethod::Fft;
  }
  return method == AcvMethod::Direct ? direct(series, dt, k) : via_fft(series, dt, k);
}

namespace serial {

AcvEstimate sample_acv(std::span<const double> series, double dt, double max_lag) {
  const std::size_t k = lag_count(series.size(), dt, max_lag);
  const auto c = centred(series);
  auto est = make_grid(k, dt);
  const double n = static_cast<double>(c.size());
  for (std::size_t lag = 0; lag <= k; ++lag) est.values[lag] = lag_sum(c, lag) / n;
  return est;
}

}  // namespace serial

double relative_l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("relative_l2: size mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace nlc::analysis
