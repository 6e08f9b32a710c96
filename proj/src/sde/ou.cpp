#include "nlc/sde/ou.hpp"

#include <cmath>

#include "nlc/errors.hpp"
#include "nlc/sde/system.hpp"

namespace nlc {

namespace {

// Moments of s^k on [0,1] against 1 and the centred linear s - 1/2.
double mom0(int k) { return 1.0 / (k + 1); }
double mom1(int k) { return 1.0 / (k + 2) - 0.5 / (k + 1); }

}  // namespace

OuStep::OuStep(double lambda, double h) {
  if (!(h > 0.0)) throw ConfigError("OuStep: step must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("OuStep: lambda must be nonnegative");
  const double mu = lambda * h;
  decay = std::exp(-mu);
  // In scaled time s = v/h the kernels are 1 (dW), h s (dZ) and exp(-mu s) (xi).
  // c1 = <e,1>/h, c2 = <e,s>/h with <f,g> = int_0^1 f g ds.
  double c1 = 0.0, c2 = 0.0, ee = 0.0, res2 = 0.0;
  if (mu <= 0.5) {
    double term = 1.0;  // (-mu)^k / k!
    for (int k = 0; k < 40; ++k) {
      c1 += term / (k + 1);
      c2 += term / (k + 2);
      term *= -mu / (k + 1);
    }
    // Residual variance from the expansion; only powers k, l >= 2 survive the projection.
    double tk = mu * mu / 2.0;
    for (int k = 2; k < 30; ++k) {
      double tl = mu * mu / 2.0;
      for (int l = 2; l < 30; ++l) {
        const double r = 1.0 / (k + l + 1) - mom0(k) * mom0(l) - 12.0 * mom1(k) * mom1(l);
        res2 += ((k + l) % 2 == 0 ? 1.0 : -1.0) * tk * tl * r;
        tl *= mu / (l + 1);
      }
      tk *= mu / (k + 1);
    }
  } else {
    c1 = -std::expm1(-mu) / mu;
    c2 = (-std::expm1(-mu) - mu * std::exp(-mu)) / (mu * mu);
    ee = -std::expm1(-2.0 * mu) / (2.0 * mu);
  }
  // Normal equations with Gram matrix [[1, 1/2], [1/2, 1/3]] in scaled units.
  const double a = 4.0 * c1 - 6.0 * c2;
  const double b = -6.0 * c1 + 12.0 * c2;
  if (mu > 0.5) res2 = ee - (a * c1 + b * c2);
  w_coef = a;
  z_coef = b / h;
  residual_sd = std::sqrt(std::max(res2, 0.0) * h);
}

SdeSystem OrnsteinUhlenbeck::system() const {
  const double lam = lambda;
  return SdeSystem::isotropic(
      1, [lam](std::span<const double> x, std::span<double> out) { out[0] = -lam * x[0]; },
      sigma);
}

double OrnsteinUhlenbeck::endpoint(double x0, const IncrementTable& fine) const {
  if (fine.channels != 1) throw ConfigError("OrnsteinUhlenbeck: expected one channel");
  const OuStep step(lambda, fine.dt);
  double x = x0;
  for (std::size_t k = 0; k < fine.steps(); ++k)
    x = step.advance(x, sigma, fine.dW[k], fine.dZ[k], 0.0);
  return x;
}

}  // namespace nlc
