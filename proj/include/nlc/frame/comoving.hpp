#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "nlc/frame/cycle.hpp"
#include "nlc/sde/system.hpp"

namespace nlc::frame {

/// Orthogonal frame U(t) carrying T(0) to T(t) and the normal hyperplane P0 along the cycle.
struct ComovingFrame {
  std::vector<Eigen::MatrixXd> U;  ///< n x n, one per grid sample
  std::vector<Eigen::MatrixXd> V;  ///< dU/dt
  Eigen::MatrixXd basis_P0;        ///< n x (n-1), orthonormal, orthogonal to T(0)
  double period = 0.0;

  std::size_t points() const { return U.size(); }
  /// U(tau) by cubic Hermite interpolation with V as derivative (tau wraps).
  Eigen::MatrixXd U_at(double tau) const;
};

struct FrameOptions {
  std::size_t substeps = 8;         ///< RK4 steps per grid interval
  double max_drift = 1e-6;          ///< tolerated |U^T U - I| before re-projection
};

/// Integrates dU/dt = -T Tdot^T U P0 + Tdot T0^T from U(0) = I. The cycle state is
/// integrated alongside so that T and Tdot are exact at every RK stage; U is projected
/// to the nearest orthogonal matrix after each grid interval.
/// StepSizeError if orthogonality drifts beyond max_drift within one interval.
ComovingFrame build_frame(const SdeSystem& ode, const CycleParameterization& cycle,
                          const FrameOptions& options = {});

/// Worst case over the grid of |U^T U - I|, |U T(0) - T(t)| and | |V| - |dT/dt| |
/// (operator norms for matrices).
struct FrameResiduals {
  double orthogonality = 0.0;
  double tangent_transport = 0.0;
  double rate_identity = 0.0;
};

FrameResiduals frame_residuals(const CycleParameterization& cycle, const ComovingFrame& frame);

/// Completes t0 to an orthonormal basis by Gram-Schmidt over e_1, ..., e_n in order.
Eigen::MatrixXd normal_basis(const Eigen::VectorXd& t0);

/// Columns t, U_i_j (row-major).
void write_csv(std::ostream& os, const ComovingFrame& frame);

}  // namespace nlc::frame
