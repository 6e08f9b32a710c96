#include "nlc/sde/integrator.hpp"

#include <cmath>
#include <exception>
#include <optional>
#include <string>

#include "nlc/errors.hpp"

namespace nlc {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator: dt must be positive");
  if (n_steps < 1) throw ConfigError("integrator: n_steps must be >= 1");
  if (record_every < 1) throw ConfigError("integrator: record_every must be >= 1");
}

namespace {

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels;
  if (n == 2) return {"x", "y"};
  for (std::size_t i = 0; i < n; ++i) labels.push_back("y" + std::to_string(i));
  return labels;
}

/// Fixed-step additive-noise stepper with preallocated work buffers.
class Stepper {
 public:
  Stepper(const SdeSystem& sys, Scheme scheme) : sys_(sys), scheme_(scheme), n_(sys.dim()) {
    a0_.resize(n_);
    abar_.resize(n_);
    ybar_.resize(n_);
    incr_.resize(n_);
    ym_.resize(n_);
    ap_.resize(n_);
    am_.resize(n_);
    const auto& s = sys.noise();
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (s.col(j).squaredNorm() > 0.0) active_.push_back(static_cast<std::size_t>(j));
    }
    isotropic_ = sys.isotropic_sigma().has_value();
  }

  void step(std::vector<double>& y, double dt, std::span<const double> dW,
            std::span<const double> dZ) {
    sys_.drift(y, a0_);
    if (scheme_ == Scheme::EulerMaruyama) {
      for (std::size_t i = 0; i < n_; ++i) y[i] += a0_[i] * dt;
      add_noise(y, dW);
      return;
    }
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t i = 0; i < n_; ++i) ybar_[i] = y[i] + a0_[i] * dt;
    sys_.drift(ybar_, abar_);
    // Heun part: dt/2 (a(Y) + a(Ybar)).
    for (std::size_t i = 0; i < n_; ++i) incr_[i] = 0.5 * dt * (a0_[i] + abar_[i]);
    const auto& s = sys_.noise();
    for (std::size_t j : active_) {
      for (std::size_t i = 0; i < n_; ++i) {
        const double b = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sqrt_dt;
        ym_[i] = ybar_[i] + b;
      }
      sys_.drift(ym_, ap_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double b = s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sqrt_dt;
        ym_[i] = ybar_[i] - b;
      }
      sys_.drift(ym_, am_);
      const double zc = dZ[j] / (2.0 * sqrt_dt);
      for (std::size_t i = 0; i < n_; ++i) {
        incr_[i] += 0.25 * dt * (ap_[i] - 2.0 * abar_[i] + am_[i]) + (ap_[i] - am_[i]) * zc;
      }
    }
    for (std::size_t i = 0; i < n_; ++i) y[i] += incr_[i];
    add_noise(y, dW);
  }

 private:
  void add_noise(std::vector<double>& y, std::span<const double> dW) const {
    if (isotropic_) {
      const double sigma = *sys_.isotropic_sigma();
      if (sigma == 0.0) return;
      for (std::size_t i = 0; i < n_; ++i) y[i] += sigma * dW[i];
      return;
    }
    const auto& s = sys_.noise();
    for (std::size_t j : active_)
      for (std::size_t i = 0; i < n_; ++i)
        y[i] += s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * dW[j];
  }

  const SdeSystem& sys_;
  Scheme scheme_;
  std::size_t n_;
  bool isotropic_ = false;
  std::vector<std::size_t> active_;
  std::vector<double> a0_, abar_, ybar_, incr_, ym_, ap_, am_;
};

void check_finite(const std::vector<double>& y, std::size_t step) {
  for (double v : y) {
    if (!std::isfinite(v)) throw DivergenceError(step, "integration diverged: non-finite state");
    if (std::abs(v) > kDivergenceBound)
      throw DivergenceError(step, "integration diverged: |state| exceeded 1e6");
  }
}

template <class Draw>
Trajectory run(const SdeSystem& sys, const IntegratorConfig& cfg, double dt, std::uint64_t seed,
               Draw&& draw) {
  const std::size_t n = sys.dim();
  if (cfg.initial_state.size() != n)
    throw ConfigError("integrator: initial_state has " + std::to_string(cfg.initial_state.size()) +
                      " entries, system dimension is " + std::to_string(n));
  Trajectory traj;
  traj.dt = dt * static_cast<double>(cfg.record_every);
  traj.channel_labels = default_labels(n);
  traj.seed = seed;
  traj.values.reserve(cfg.stored_rows() * n);

  std::vector<double> y = cfg.initial_state;
  check_finite(y, 0);
  std::vector<double> dW(n), dZ(n);
  Stepper stepper(sys, cfg.scheme);
  const std::size_t total = cfg.total_steps();
  if (cfg.burn_in == 0) traj.values.insert(traj.values.end(), y.begin(), y.end());
  for (std::size_t k = 0; k < total; ++k) {
    draw(k, dW, dZ);
    stepper.step(y, dt, dW, dZ);
    check_finite(y, k + 1);
    const std::size_t done = k + 1;
    if (done >= cfg.burn_in && (done - cfg.burn_in) % cfg.record_every == 0)
      traj.values.insert(traj.values.end(), y.begin(), y.end());
  }
  return traj;
}

}  // namespace

Trajectory integrate_path(const SdeSystem& system, const IntegratorConfig& config) {
  config.validate();
  GaussianIncrements gen(config.seed, config.dt, system.dim());
  return run(system, config, config.dt, config.seed,
             [&](std::size_t k, std::span<double> dW, std::span<double> dZ) {
               gen.draw(k, dW, dZ);
             });
}

Trajectory integrate_path(const SdeSystem& system, const IntegratorConfig& config,
                          const IncrementTable& increments) {
  IntegratorConfig cfg = config;
  cfg.dt = increments.dt;
  cfg.validate();
  if (increments.channels != system.dim())
    throw ConfigError("integrator: increment channels do not match system dimension");
  if (increments.steps() < cfg.total_steps())
    throw ConfigError("integrator: increment table shorter than the requested steps");
  const std::size_t m = increments.channels;
  return run(system, cfg, increments.dt, config.seed,
             [&](std::size_t k, std::span<double> dW, std::span<double> dZ) {
               for (std::size_t j = 0; j < m; ++j) {
                 dW[j] = increments.dW[k * m + j];
                 dZ[j] = increments.dZ[k * m + j];
               }
             });
}

namespace {

Trajectory member(const SdeSystem& system, const IntegratorConfig& config, std::size_t k) {
  IntegratorConfig cfg = config;
  cfg.seed = derive_subseed(config.seed, k);
  try {
    return integrate_path(system, cfg);
  } catch (const NumericalError& e) {
    throw PathError(k, e.what());
  }
}

}  // namespace

std::vector<Trajectory> integrate_ensemble(const SdeSystem& system, const IntegratorConfig& config,
                                           std::size_t n_paths) {
  if (n_paths < 1) throw ConfigError("integrate_ensemble: n_paths must be >= 1");
  config.validate();
  std::vector<Trajectory> out(n_paths);
  std::vector<std::exception_ptr> errors(n_paths);
  const auto count = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      out[idx] = member(system, config, idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace serial {

std::vector<Trajectory> integrate_ensemble(const SdeSystem& system, const IntegratorConfig& config,
                                           std::size_t n_paths) {
  if (n_paths < 1) throw ConfigError("integrate_ensemble: n_paths must be >= 1");
  config.validate();
  std::vector<Trajectory> out;
  out.reserve(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) out.push_back(member(system, config, k));
  return out;
}

}  // namespace serial

}  // namespace nlc
