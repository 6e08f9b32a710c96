#pragma once

#include <span>
#include <vector>

#include "nlc/analysis/estimates.hpp"
#include "nlc/hopf/hopf.hpp"

namespace nlc::analysis {

/// Leading-order stationary autocovariance of x for the noisy Hopf cycle:
///   (r^2/2) [1 + NSR^2 e^{-lambda |u|}] cos(alpha u) e^{-|u| (sigma/r)^2 / 2}.
double acv_formula(const hopf::HopfParams& p, double u);

/// Leading-order power spectral density of x (Fourier transform of acv_formula).
/// With s = (sigma/r)^2 and g(b) = 2 r^2 b [4(alpha^2+w^2) + b^2] / ([4(alpha-w)^2 + b^2][4(alpha+w)^2 + b^2]),
///   PSD(w) = g(s) + NSR^2 g(s + 2 lambda).
/// DomainError for sigma = 0, where the spectrum degenerates to lines at +-alpha.
double psd_formula(const hopf::HopfParams& p, double omega);

AcvEstimate acv_curve(const hopf::HopfParams& p, std::span<const double> lags);
PsdEstimate psd_curve(const hopf::HopfParams& p, std::span<const double> omegas);

/// Uniform grid {0, step, 2 step, ...} with `count` points.
std::vector<double> uniform_grid(double step, std::size_t count);

}  // namespace nlc::analysis
