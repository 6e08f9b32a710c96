#include "nlc/hopf/hopf.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include "nlc/errors.hpp"
#include "nlc/io/csv.hpp"
#include "nlc/sde/ou.hpp"
#include "nlc/sde/philox.hpp"

namespace nlc::hopf {

void HopfParams::validate() const {
  if (!(alpha > 0) || !(alpha0 > 0) || !(lambda > 0) || !(r > 0))
    throw ConfigError("HopfParams: alpha, alpha0, lambda and r must be positive");
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw ConfigError("HopfParams: sigma must be >= 0");
}

double HopfParams::period() const { return 2.0 * std::numbers::pi / alpha; }

HopfParams HopfParams::with_nsr(double alpha, double alpha0, double lambda, double r,
                                double nsr_value) {
  if (!(nsr_value >= 0)) throw ConfigError("HopfParams: nsr must be >= 0");
  HopfParams p{alpha, alpha0, lambda, r, 0.0};
  p.sigma = std::sqrt(sigma_for_nsr(lambda, r, nsr_value));
  p.validate();
  return p;
}

double sigma_for_nsr(double lambda, double r, double nsr_value) {
  return 2.0 * lambda * r * r * nsr_value * nsr_value;
}

double nsr(const HopfParams& p) {
  if (p.lambda == 0.0 || p.r == 0.0) throw DomainError("nsr: lambda and r must be nonzero");
  return std::sqrt(p.sigma * p.sigma / (2.0 * p.lambda)) / std::abs(p.r);
}

std::array<double, 2> hopf_drift(const HopfParams& p, double x, double y) {
  const double half_lam = 0.5 * p.lambda;
  const double rho2 = (x * x + y * y) / (p.r * p.r);
  const double shear = p.alpha - p.alpha0;
  return {half_lam * x - p.alpha0 * y + rho2 * (-half_lam * x - shear * y),
          p.alpha0 * x + half_lam * y + rho2 * (-half_lam * y + shear * x)};
}

SdeSystem hopf_system(const HopfParams& p) {
  p.validate();
  SdeSystem sys = SdeSystem::isotropic(
      2,
      [p](std::span<const double> s, std::span<double> out) {
        const auto f = hopf_drift(p, s[0], s[1]);
        out[0] = f[0];
        out[1] = f[1];
      },
      p.sigma);
  sys.with_jacobian([p](std::span<const double> s, Eigen::MatrixXd& jac) {
    const double x = s[0], y = s[1];
    const double r2 = p.r * p.r;
    const double rho2 = (x * x + y * y) / r2;
    const double hl = 0.5 * p.lambda;
    const double sh = p.alpha - p.alpha0;
    const double gx = -hl * x - sh * y;  // nonlinear direction field
    const double gy = -hl * y + sh * x;
    jac.resize(2, 2);
    jac(0, 0) = hl + rho2 * (-hl) + 2 * x / r2 * gx;
    jac(0, 1) = -p.alpha0 + rho2 * (-sh) + 2 * y / r2 * gx;
    jac(1, 0) = p.alpha0 + rho2 * sh + 2 * x / r2 * gy;
    jac(1, 1) = hl + rho2 * (-hl) + 2 * y / r2 * gy;
  });
  return sys;
}

IntegratorConfig stationary_config(const HopfParams& p, double periods, double dt_periods,
                                   std::size_t record_every, std::uint64_t seed) {
  p.validate();
  if (!(periods > 0) || !(dt_periods > 0)) throw ConfigError("stationary_config: periods and dt must be positive");
  IntegratorConfig cfg;
  cfg.dt = p.period() * dt_periods;
  cfg.n_steps = static_cast<std::size_t>(std::llround(periods / dt_periods));
  cfg.record_every = record_every;
  cfg.burn_in = static_cast<std::size_t>(std::ceil(10.0 / p.lambda / cfg.dt));
  cfg.seed = seed;
  return cfg;
}

namespace {

IntegratorConfig with_cycle_start(const HopfParams& p, IntegratorConfig cfg) {
  if (cfg.initial_state.empty()) cfg.initial_state = {p.r, 0.0};
  return cfg;
}

}  // namespace

Trajectory simulate_hopf_exact(const HopfParams& p, const IntegratorConfig& config) {
  return integrate_path(hopf_system(p), with_cycle_start(p, config));
}

std::vector<Trajectory> simulate_hopf_exact_ensemble(const HopfParams& p,
                                                     const IntegratorConfig& config,
                                                     std::size_t n_paths) {
  return integrate_ensemble(hopf_system(p), with_cycle_start(p, config), n_paths);
}

Trajectory PhaseDeviationPath::reconstructed() const {
  Trajectory t;
  t.dt = dt;
  t.seed = seed;
  t.channel_labels = {"x", "y"};
  t.values.reserve(2 * rows());
  for (std::size_t k = 0; k < rows(); ++k) {
    t.values.push_back(x[k]);
    t.values.push_back(y[k]);
  }
  return t;
}

PhaseDeviationPath simulate_hopf_linear(const HopfParams& p, const IntegratorConfig& config,
                                        const LinearModelOptions& options) {
  p.validate();
  config.validate();
  double z = 0.0, tau = 0.0;
  if (!config.initial_state.empty()) {
    if (config.initial_state.size() != 2)
      throw ConfigError("simulate_hopf_linear: initial_state must be (z0, tau0)");
    z = config.initial_state[0];
    tau = config.initial_state[1];
  }
  const double dt = config.dt;
  const OuStep ou(p.lambda, dt);
  // Channel 0 drives z (W_d), channel 1 drives tau (W_p); one extra normal
  // completes the exact OU transition.
  GaussianIncrements gen(config.seed, dt, 2, 1);
  std::array<double, 2> dW{}, dZ{};

  const double shear = 2.0 * (p.alpha - p.alpha0) / p.alpha;
  const double floor = options.singularity_floor * p.r;
  const auto denominator = [&](double zz, std::size_t step) {
    double d = p.r + zz;
    if (options.regularize_singularity) {
      if (std::abs(d) < floor) d = std::copysign(floor, d);
    } else if (d <= 0.0) {
      throw SingularityError(step, "simulate_hopf_linear: r + z reached 0");
    }
    return d;
  };
  const auto phase_drift = [&](double zz, std::size_t step) {
    if (options.leading_order) return 1.0;
    return 1.0 + shear * zz / denominator(zz, step);
  };
  const auto phase_noise = [&](double zz, std::size_t step) {
    if (options.leading_order) return p.sigma / (p.alpha * p.r);
    return p.sigma / (p.alpha * denominator(zz, step));
  };

  PhaseDeviationPath out;
  out.dt = dt * static_cast<double>(config.record_every);
  out.seed = config.seed;
  const std::size_t rows = config.stored_rows();
  out.tau.reserve(rows);
  out.z.reserve(rows);
  out.x.reserve(rows);
  out.y.reserve(rows);
  const auto record = [&] {
    const double phi = p.alpha * tau;
    out.tau.push_back(tau);
    out.z.push_back(z);
    out.x.push_back((p.r + z) * std::cos(phi));
    out.y.push_back((p.r + z) * std::sin(phi));
  };
  if (config.burn_in == 0) record();
  const std::size_t total = config.total_steps();
  for (std::size_t k = 0; k < total; ++k) {
    gen.draw(k, dW, dZ);
    const double z_next = ou.advance(z, p.sigma, dW[0], dZ[0], gen.extra(0));
    const double drift = 0.5 * (phase_drift(z, k) + phase_drift(z_next, k + 1));
    tau += drift * dt + phase_noise(z, k) * dW[1];
    z = z_next;
    if (!std::isfinite(z) || !std::isfinite(tau) || std::abs(z) > kDivergenceBound)
      throw DivergenceError(k + 1, "simulate_hopf_linear: state diverged");
    const std::size_t done = k + 1;
    if (done >= config.burn_in && (done - config.burn_in) % config.record_every == 0) record();
  }
  return out;
}

std::vector<PhaseDeviationPath> simulate_hopf_linear_ensemble(const HopfParams& p,
                                                              const IntegratorConfig& config,
                                                              std::size_t n_paths,
                                                              const LinearModelOptions& options) {
  if (n_paths < 1) throw ConfigError("simulate_hopf_linear_ensemble: n_paths must be >= 1");
  std::vector<PhaseDeviationPath> out(n_paths);
  std::vector<std::exception_ptr> errors(n_paths);
  const auto count = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    IntegratorConfig cfg = config;
    cfg.seed = derive_subseed(config.seed, idx);
    try {
      out[idx] = simulate_hopf_linear(p, cfg, options);
    } catch (const NumericalError& e) {
      errors[idx] = std::make_exception_ptr(PathError(idx, e.what()));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_csv(std::ostream& os, const PhaseDeviationPath& path) {
  io::CsvWriter out(os, {"t", "tau", "z", "x", "y"});
  for (std::size_t k = 0; k < path.rows(); ++k) {
    const double row[] = {static_cast<double>(k) * path.dt, path.tau[k], path.z[k], path.x[k],
                          path.y[k]};
    out.row(row);
  }
}

}  // namespace nlc::hopf
