#pragma once

#include <span>

#include "nlc/analysis/estimates.hpp"

namespace nlc::analysis {

enum class AcvMethod { Auto, Direct, Fft };

/// Biased sample autocovariance (1/N) sum_t (x_t - xbar)(x_{t+k} - xbar) for
/// lags k dt, k = 0..round(max_lag/dt). ConfigError if max_lag > N dt / 2.
/// Direct evaluates the lag sums in parallel; Fft uses a zero-padded transform.
AcvEstimate sample_acv(std::span<const double> series, double dt, double max_lag,
                       AcvMethod method = AcvMethod::Auto);

namespace serial {
/// Single-threaded direct lag sums; reference for nlc::analysis::sample_acv.
AcvEstimate sample_acv(std::span<const double> series, double dt, double max_lag);
}  // namespace serial

/// Relative L2 distance sqrt(sum (a-b)^2 / sum b^2).
double relative_l2(std::span<const double> a, std::span<const double> b);

}  // namespace nlc::analysis
