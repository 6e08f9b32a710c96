#pragma once

#include <functional>
#include <span>

#include "nlc/analysis/estimates.hpp"
#include "nlc/hopf/hopf.hpp"

namespace nlc::analysis {

struct WkOptions {
  double du = 0.0;        ///< quadrature step; 0 picks pi / (32 max omega)
  double cutoff = 1e-6;   ///< truncate once |ACV| stays below cutoff * ACV(0)
  double max_lag = 1e6;   ///< give up (non-decaying ACV) beyond this lag
  std::size_t max_samples = 50'000'000;  ///< or beyond this many quadrature nodes
};

/// PSD(w) = 2 int_0^U ACV(u) cos(w u) du by the trapezoid rule, for an even ACV.
/// U is the end of the first block of 4096 nodes on which |ACV| stays below
/// cutoff * max |ACV| over the first block (ACV(0) for a proper covariance); NumericalError if that never happens within the limits.
/// An identically zero ACV gives a zero spectrum.
PsdEstimate wk_transform(const std::function<double(double)>& acv, std::span<const double> omegas,
                         const WkOptions& options = {});

/// Same transform on a tabulated estimate (trapezoid on its own lag grid).
PsdEstimate wk_transform(const AcvEstimate& acv, std::span<const double> omegas);

/// Transform of acv_formula with a step and truncation chosen from its envelope.
/// NumericalError for sigma = 0 (no decay).
PsdEstimate wk_transform(const hopf::HopfParams& p, std::span<const double> omegas);

}  // namespace nlc::analysis
