#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nlc/sde/integrator.hpp"
#include "nlc/sde/ou.hpp"

namespace nlc {

struct OrderStudy {
  std::vector<double> dts;
  std::vector<double> rms_errors;  ///< root-mean-square endpoint error per dt
  double slope = 0.0;              ///< least-squares slope of log(error) vs log(dt)
};

struct OrderStudyConfig {
  std::vector<double> dts;  ///< strictly decreasing, at least 3
  std::size_t n_paths = 200;
  double horizon = 1.0;
  double x0 = 0.0;
  std::size_t refinement = 16;  ///< reference grid is dts.back() / refinement
  std::uint64_t seed = 1;
};

/// Strong (mean-square) convergence slope of `scheme` on the OU process.
/// All step sizes of one path are driven by coarsenings of a single fine
/// increment table, and the reference is the OU pathwise solution on that table.
OrderStudy strong_order_estimate(const OrnsteinUhlenbeck& ou, Scheme scheme,
                                 const OrderStudyConfig& config);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace nlc
