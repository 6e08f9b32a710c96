#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlc/sde/increments.hpp"
#include "nlc/sde/system.hpp"

namespace nlc {

/// Exact one-step transition of dz = -lambda z dt + sigma dW, coupled to the
/// step's Wiener increments. The stochastic integral
///   xi = int_0^h exp(-lambda (h-u)) dW(u)
/// is split into its projection on (dW, dZ) plus an independent residual:
///   xi = w_coef dW + z_coef dZ + residual_sd U,   U ~ N(0,1).
struct OuStep {
  double decay = 1.0;  ///< exp(-lambda h)
  double w_coef = 1.0;
  double z_coef = 0.0;
  double residual_sd = 0.0;

  OuStep(double lambda, double h);

  double advance(double z, double sigma, double dW, double dZ, double normal) const {
    return decay * z + sigma * (w_coef * dW + z_coef * dZ + residual_sd * normal);
  }
};

/// The 1-D OU process, which has a pathwise solution in terms of the driving increments.
struct OrnsteinUhlenbeck {
  double lambda = 1.0;
  double sigma = 1.0;

  SdeSystem system() const;
  double stationary_variance() const { return sigma * sigma / (2.0 * lambda); }

  /// Endpoint after all steps of `fine`, using the conditional mean of each
  /// step's stochastic integral (residual error O(lambda^2 h^2) overall).
  double endpoint(double x0, const IncrementTable& fine) const;
};

}  // namespace nlc
