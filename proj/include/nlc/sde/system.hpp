#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nlc {

/// Right-hand side f: writes f(state) into `out` (both of length dim).
using DriftFn = std::function<void(std::span<const double> state, std::span<double> out)>;
/// Optional analytic Jacobian: writes df/dstate into `out` (dim x dim).
using JacobianFn = std::function<void(std::span<const double> state, Eigen::MatrixXd& out)>;

/// Ito SDE dy = f(y) dt + S dW with a constant noise matrix S.
class SdeSystem {
 public:
  /// General constant noise matrix; throws ConfigError on a shape mismatch.
  SdeSystem(std::size_t dim, DriftFn drift, Eigen::MatrixXd noise);

  /// S = sigma * Id.
  static SdeSystem isotropic(std::size_t dim, DriftFn drift, double sigma);
  /// S = 0; the deterministic ODE dy/dt = f(y).
  static SdeSystem deterministic(std::size_t dim, DriftFn drift);

  SdeSystem& with_jacobian(JacobianFn jac) {
    jacobian_ = std::move(jac);
    return *this;
  }

  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXd& noise() const { return noise_; }
  const std::optional<double>& isotropic_sigma() const { return sigma_; }
  const JacobianFn& jacobian() const { return jacobian_; }

  void drift(std::span<const double> state, std::span<double> out) const { drift_(state, out); }
  std::vector<double> drift(std::span<const double> state) const;

  /// Analytic Jacobian if one was supplied, otherwise central differences
  /// with step 1e-6 (1 + |state|).
  Eigen::MatrixXd jacobian_at(std::span<const double> state) const;

 private:
  std::size_t dim_;
  DriftFn drift_;
  Eigen::MatrixXd noise_;
  std::optional<double> sigma_;
  JacobianFn jacobian_;
};

}  // namespace nlc
