#include "nlc/sde/convergence.hpp"

#include <cmath>
#include <exception>

#include "nlc/errors.hpp"

namespace nlc {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("loglog_slope: need >= 2 pairs");
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

std::size_t exact_ratio(double num, double den, const char* what) {
  const double q = num / den;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * r)
    throw ConfigError(std::string("strong_order_estimate: ") + what + " is not an integer multiple");
  return static_cast<std::size_t>(r);
}

}  // namespace

OrderStudy strong_order_estimate(const OrnsteinUhlenbeck& ou, Scheme scheme,
                                 const OrderStudyConfig& config) {
  const auto& dts = config.dts;
  if (dts.size() < 3) throw ConfigError("strong_order_estimate: need at least 3 step sizes");
  for (std::size_t i = 1; i < dts.size(); ++i)
    if (!(dts[i] < dts[i - 1])) throw ConfigError("strong_order_estimate: dts must be strictly decreasing");
  if (!(dts.back() > 0.0)) throw ConfigError("strong_order_estimate: dts must be positive");
  if (config.n_paths < 1 || config.refinement < 1)
    throw ConfigError("strong_order_estimate: n_paths and refinement must be >= 1");

  const double h = dts.back() / static_cast<double>(config.refinement);
  const std::size_t n_fine = exact_ratio(config.horizon, h, "horizon / fine step");
  std::vector<std::size_t> factors;
  for (double dt : dts) factors.push_back(exact_ratio(dt, h, "dt / fine step"));
  for (std::size_t f : factors)
    if (n_fine % f != 0) throw ConfigError("strong_order_estimate: horizon must be a multiple of every dt");

  const SdeSystem system = ou.system();
  const std::size_t n_dt = dts.size();
  std::vector<double> sq(config.n_paths * n_dt, 0.0);
  std::vector<std::exception_ptr> errors(config.n_paths);
  const auto count = static_cast<std::ptrdiff_t>(config.n_paths);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t p = 0; p < count; ++p) {
    const auto idx = static_cast<std::size_t>(p);
    try {
      const auto fine = IncrementTable::sample(derive_subseed(config.seed, idx), h, 1, n_fine);
      const double exact = ou.endpoint(config.x0, fine);
      for (std::size_t i = 0; i < n_dt; ++i) {
        const auto coarse = fine.coarsen(factors[i]);
        IntegratorConfig cfg;
        cfg.scheme = scheme;
        cfg.n_steps = coarse.steps();
        cfg.initial_state = {config.x0};
        cfg.record_every = cfg.n_steps;
        const auto traj = integrate_path(system, cfg, coarse);
        const double err = traj.values.back() - exact;
        sq[idx * n_dt + i] = err * err;
      }
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  OrderStudy study;
  study.dts = dts;
  study.rms_errors.assign(n_dt, 0.0);
  for (std::size_t p = 0; p < config.n_paths; ++p)
    for (std::size_t i = 0; i < n_dt; ++i) study.rms_errors[i] += sq[p * n_dt + i];
  for (double& e : study.rms_errors) e = std::sqrt(e / static_cast<double>(config.n_paths));
  study.slope = loglog_slope(study.dts, study.rms_errors);
  return study;
}

}  // namespace nlc
