#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nlc/sde/system.hpp"

namespace nlc::frame {

/// One period of a limit cycle sampled on m uniform times t_k = k period / m.
/// Row k of each matrix belongs to t_k.
struct CycleParameterization {
  double period = 0.0;
  std::vector<double> grid;
  Eigen::MatrixXd L;       ///< m x n cycle states
  Eigen::MatrixXd f_on_L;  ///< m x n drift
  Eigen::MatrixXd T;       ///< m x n unit tangents f / |f|
  Eigen::MatrixXd Tdot;    ///< m x n dT/dt = (I - T T^T) J T
  std::vector<Eigen::MatrixXd> J;  ///< m Jacobians at L
  std::vector<double> kappa;       ///< curvature |dT/dt| / speed
  std::vector<double> speed;       ///< |f(L)|
  double closure_error = 0.0;      ///< |L(period) - L(0)|

  std::size_t points() const { return grid.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(L.cols()); }
  double step() const { return period / static_cast<double>(points()); }

  /// L(tau) for any tau (wrapped modulo the period), cubic Hermite with exact derivatives.
  Eigen::VectorXd state_at(double tau) const;
  /// |f(L(tau))| by periodic cubic interpolation.
  double speed_at(double tau) const;
};

struct CycleOptions {
  std::size_t grid_points = 1024;
  double tol = 1e-8;               ///< section-return convergence and closure tolerance
  double ode_tol = 1e-12;          ///< abs/rel tolerance of the adaptive integrator
  double transient_time = 0.0;     ///< integrate this long before looking for returns
  std::size_t max_returns = 1000;
  double max_time = 1e5;           ///< search horizon
  double fixed_point_threshold = 1e-8;  ///< |f| below this (times 1 + |x|) means a fixed point
  double initial_step = 1e-3;
};

/// Converges onto an attracting cycle from `initial_guess` by iterating returns to a
/// Poincare section through the current point, normal to the drift, then samples one
/// period starting at the converged section point. Noise in `ode` is ignored.
/// NoCycleError if no return happens within the horizon or the orbit diverges;
/// FixedPointError if the flow settles on an equilibrium.
CycleParameterization find_limit_cycle(const SdeSystem& ode, const Eigen::VectorXd& initial_guess,
                                       const CycleOptions& options = {});

/// Columns t, L0.., T0.., speed, kappa.
void write_csv(std::ostream& os, const CycleParameterization& cycle);

namespace detail {

/// Wraps tau into [0, period) and returns (index k, fraction in [0,1)).
std::pair<std::size_t, double> locate(double tau, double period, std::size_t m);

/// Cubic Hermite on [0,1] with end values and end slopes already scaled by the step.
inline double hermite(double y0, double y1, double d0, double d1, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * d1;
}

/// Periodic Catmull-Rom interpolation of scalar samples.
double periodic_cubic(const std::vector<double>& y, double tau, double period);

}  // namespace detail

}  // namespace nlc::frame
