#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlc/frame/comoving.hpp"
#include "nlc/frame/cycle.hpp"
#include "nlc/sde/integrator.hpp"
#include "nlc/sde/trajectory.hpp"

namespace nlc::frame {

/// Linear deviation dynamics dz0 = J0(tau) z0 dt + sigma dW_d,
/// phase dtau = dt + sigma dW_p / |f(L(tau))|.
struct ReducedModel {
  std::vector<Eigen::MatrixXd> J0;  ///< (n-1) x (n-1) per grid sample
  std::vector<double> speed;
  double period = 0.0;
  double sigma = 0.0;
  double monodromy_radius = 0.0;    ///< spectral radius of the time-ordered exp of J0
  std::string warning;              ///< non-empty when the monodromy is not contracting

  std::size_t deviation_dim() const { return J0.empty() ? 0 : static_cast<std::size_t>(J0[0].rows()); }
  bool stable() const { return monodromy_radius < 1.0; }
  Eigen::MatrixXd J0_at(double tau) const;
  double speed_at(double tau) const;
};

/// J0 = B^T U^T P J U B with B = basis_P0 and P = I - T T^T, at every grid sample.
ReducedModel reduce(const CycleParameterization& cycle, const ComovingFrame& frame, double sigma);

/// Time-ordered exponential of J0 over one period (RK4 on the grid).
Eigen::MatrixXd monodromy(const ReducedModel& model);

struct ReducedPath {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> tau;
  Eigen::MatrixXd z;  ///< rows x (n-1)

  std::size_t rows() const { return tau.size(); }
};

/// Integrates the reduced SDE. initial_state, if given, is (z0..., tau0).
/// Channels 0..n-2 of the increment stream drive z0, channel n-1 drives tau; a
/// linear Hopf run with the same seed and dt sees the same Wiener paths.
ReducedPath simulate_reduced(const ReducedModel& model, const IntegratorConfig& config);
std::vector<ReducedPath> simulate_reduced_ensemble(const ReducedModel& model,
                                                   const IntegratorConfig& config,
                                                   std::size_t n_paths);

/// y = L(tau) + U(tau) B z0 on every row.
Trajectory reconstruct(const CycleParameterization& cycle, const ComovingFrame& frame,
                       const ReducedPath& path);

/// Columns t, tau, z0...
void write_csv(std::ostream& os, const ReducedPath& path);

}  // namespace nlc::frame
