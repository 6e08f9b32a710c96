#include "nlc/sde/system.hpp"

#include <cmath>

#include "nlc/errors.hpp"

namespace nlc {

SdeSystem::SdeSystem(std::size_t dim, DriftFn drift, Eigen::MatrixXd noise)
    : dim_(dim), drift_(std::move(drift)), noise_(std::move(noise)) {
  if (dim_ == 0) throw ConfigError("SdeSystem: dimension must be positive");
  if (!drift_) throw ConfigError("SdeSystem: drift is empty");
  if (static_cast<std::size_t>(noise_.rows()) != dim_ ||
      static_cast<std::size_t>(noise_.cols()) != dim_)
    throw ConfigError("SdeSystem: noise matrix must be dim x dim");
}

SdeSystem SdeSystem::isotropic(std::size_t dim, DriftFn drift, double sigma) {
  if (!std::isfinite(sigma)) throw ConfigError("SdeSystem: sigma must be finite");
  const auto n = static_cast<Eigen::Index>(dim);
  SdeSystem sys(dim, std::move(drift), sigma * Eigen::MatrixXd::Identity(n, n));
  sys.sigma_ = sigma;
  return sys;
}

SdeSystem SdeSystem::deterministic(std::size_t dim, DriftFn drift) {
  return isotropic(dim, std::move(drift), 0.0);
}

std::vector<double> SdeSystem::drift(std::span<const double> state) const {
  std::vector<double> out(dim_);
  drift_(state, out);
  return out;
}

Eigen::MatrixXd SdeSystem::jacobian_at(std::span<const double> state) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXd jac(n, n);
  if (jacobian_) {
    jacobian_(state, jac);
    return jac;
  }
  double norm = 0.0;
  for (double v : state) norm += v * v;
  const double h = 1e-6 * (1.0 + std::sqrt(norm));
  std::vector<double> probe(state.begin(), state.end());
  std::vector<double> fp(dim_), fm(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    probe[k] = state[k] + h;
    drift_(probe, fp);
    probe[k] = state[k] - h;
    drift_(probe, fm);
    probe[k] = state[k];
    for (std::size_t i = 0; i < dim_; ++i)
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (fp[i] - fm[i]) / (2 * h);
  }
  return jac;
}

}  // namespace nlc
