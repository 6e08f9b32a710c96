#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlc/analysis/estimates.hpp"
#include "nlc/errors.hpp"
#include "nlc/hopf/hopf.hpp"

namespace nlc::fit {

enum class Target { Acv, Psd };

std::string to_string(Target t);
/// "acv" or "psd"; ConfigError otherwise.
Target parse_target(const std::string& s);

/// Positive interval per fitted parameter, in the order r, alpha, lambda, sigma.
struct Bounds {
  std::array<double, 4> lower{1e-12, 1e-12, 1e-12, 1e-12};
  std::array<double, 4> upper{1e12, 1e12, 1e12, 1e12};
  void validate() const;
};

struct FitProblem {
  Target target = Target::Acv;
  std::vector<double> grid;    ///< lags or angular frequencies
  std::vector<double> values;
  /// Defaults to the starting point scaled by [1e-4, 1e4] per parameter.
  std::optional<Bounds> bounds;
  std::optional<hopf::HopfParams> initial;
  /// ACV only: drop lags beyond the first point where the envelope falls below 5% of ACV(0).
  bool truncate_acv = true;

  static FitProblem from(const analysis::AcvEstimate& acv);
  static FitProblem from(const analysis::PsdEstimate& psd);
  /// ConfigError for empty or mismatched curves and bad bounds.
  void validate() const;
};

struct Derived {
  double sigma_sq_over_acv0 = 0.0;  ///< 1/time
  double focal_lyapunov = 0.0;      ///< lambda / 2
  double period = 0.0;              ///< 2 pi / alpha
  double nsr = 0.0;
};

struct FitResult {
  hopf::HopfParams params;  ///< alpha0 is not identifiable and is set to alpha
  double residual = 0.0;    ///< sum of squared errors on the fitted points
  Target target = Target::Acv;
  std::size_t n_points = 0;
  Derived derived;
  std::vector<double> restart_residuals;  ///< best residual after each restart
  bool converged = false;
};

/// Raised when no restart met the simplex tolerance; carries the best point found.
class FitConvergenceError : public NumericalError {
 public:
  FitConvergenceError(const std::string& what, FitResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// Starting point from the curve's shape. ACV: alpha from zero-crossing spacing,
/// r and the NSR term from the log-envelope of the peaks, sigma from its long-lag slope.
/// PSD: alpha from the dominant peak, sigma from its half width, lambda from the
/// broad background at omega = 0. GuessFailure without oscillatory structure.
hopf::HopfParams initial_guess(const std::vector<double>& grid, const std::vector<double>& values,
                               Target target);

/// Index one past the last lag kept for an ACV fit (envelope below 5% of ACV(0)).
std::size_t acv_fit_range(const std::vector<double>& lags, const std::vector<double>& values);

/// Least squares in log-parameters by Nelder-Mead with 5 deterministic jittered restarts.
FitResult fit(const FitProblem& problem);

Derived derived_quantities(const hopf::HopfParams& params);

}  // namespace nlc::fit
