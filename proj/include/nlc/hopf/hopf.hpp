#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nlc/sde/integrator.hpp"
#include "nlc/sde/system.hpp"
#include "nlc/sde/trajectory.hpp"

namespace nlc::hopf {

/// Supercritical Hopf normal form with isotropic additive noise.
///   alpha  - angular frequency on the limit cycle
///   alpha0 - angular frequency near the focus
///   lambda - magnitude of the cycle's Lyapunov exponent
///   r      - cycle radius
///   sigma  - noise intensity
struct HopfParams {
  double alpha = 1.0;
  double alpha0 = 1.0;
  double lambda = 1.0;
  double r = 1.0;
  double sigma = 0.0;

  /// ConfigError unless alpha, alpha0, lambda, r > 0 and sigma >= 0.
  void validate() const;
  double period() const;
  /// Params with sigma chosen so that nsr(params) == nsr_value.
  static HopfParams with_nsr(double alpha, double alpha0, double lambda, double r, double nsr_value);
};

/// Noise-to-signal ratio sqrt(sigma^2 / (2 lambda)) / r. DomainError if lambda or r is 0.
double nsr(const HopfParams& p);

/// sigma^2 that gives the requested NSR: 2 lambda r^2 nsr^2.
double sigma_for_nsr(double lambda, double r, double nsr_value);

/// Deterministic drift of the normal form at (x, y).
std::array<double, 2> hopf_drift(const HopfParams& p, double x, double y);

/// The normal form as an SDE with S = sigma Id and an analytic Jacobian.
SdeSystem hopf_system(const HopfParams& p);

/// Integrator settings for a stationary run: dt = period * dt_periods,
/// burn-in of 10/lambda, start on the cycle at phase 0.
IntegratorConfig stationary_config(const HopfParams& p, double periods, double dt_periods,
                                   std::size_t record_every, std::uint64_t seed);

/// Direct simulation of the normal form. An empty initial_state starts at (r, 0).
Trajectory simulate_hopf_exact(const HopfParams& p, const IntegratorConfig& config);
std::vector<Trajectory> simulate_hopf_exact_ensemble(const HopfParams& p,
                                                     const IntegratorConfig& config,
                                                     std::size_t n_paths);

/// Phase tau, deviation z and the reconstruction ((r+z) cos(alpha tau), (r+z) sin(alpha tau)).
struct PhaseDeviationPath {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> tau;
  std::vector<double> z;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t rows() const { return tau.size(); }
  /// (x, y) as a two-channel trajectory.
  Trajectory reconstructed() const;
};

struct LinearModelOptions {
  /// Drop the 2z(alpha - alpha0) phase drift and use alpha r as the noise denominator,
  /// so alpha tau = alpha t + (sigma / r) W_p exactly.
  bool leading_order = false;
  /// Floor |r + z| at singularity_floor * r in the phase equation instead of failing.
  bool regularize_singularity = false;
  double singularity_floor = 1e-2;
};

/// Linear phase/deviation model: z is an exact OU process, tau is driven by an
/// independent Wiener channel. initial_state, if given, is (z0, tau0).
/// SingularityError if r + z reaches 0 (full model, no regularization).
PhaseDeviationPath simulate_hopf_linear(const HopfParams& p, const IntegratorConfig& config,
                                        const LinearModelOptions& options = {});
std::vector<PhaseDeviationPath> simulate_hopf_linear_ensemble(const HopfParams& p,
                                                              const IntegratorConfig& config,
                                                              std::size_t n_paths,
                                                              const LinearModelOptions& options = {});

/// CSV with header `t,tau,z,x,y`.
void write_csv(std::ostream& os, const PhaseDeviationPath& path);

}  // namespace nlc::hopf
