#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "nlc/errors.hpp"
#include "nlc/sde/convergence.hpp"
#include "nlc/sde/integrator.hpp"
#include "nlc/sde/ou.hpp"
#include "nlc/sde/philox.hpp"

using namespace nlc;

namespace {

SdeSystem zero_system(std::size_t n) {
  return SdeSystem::deterministic(
      n, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); });
}

double sample_variance(const std::vector<double>& v, std::size_t skip = 0) {
  const double n = static_cast<double>(v.size() - skip);
  const double mean = std::accumulate(v.begin() + static_cast<long>(skip), v.end(), 0.0) / n;
  double s = 0.0;
  for (std::size_t i = skip; i < v.size(); ++i) s += (v[i] - mean) * (v[i] - mean);
  return s / n;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  // Random123 kat_vectors for philox4x32_10.
  auto r = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
  CHECK(r[0] == 0x6627e8d5u);
  CHECK(r[1] == 0xe169c58du);
  CHECK(r[2] == 0xbc57ac4cu);
  CHECK(r[3] == 0x9b00dbd8u);
  r = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                        {0xffffffffu, 0xffffffffu});
  CHECK(r[0] == 0x408f276du);
  CHECK(r[1] == 0x41c83b0eu);
  CHECK(r[2] == 0xa20bc7c6u);
  CHECK(r[3] == 0x6d5451fdu);
}

TEST_CASE("Wiener increments have the right first two moments") {
  const double dt = 0.01;
  const std::size_t n = 200000;
  const auto table = IncrementTable::sample(99, dt, 1, n);
  double mw = 0, mz = 0, vw = 0, vz = 0, cwz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mw += table.dW[i];
    mz += table.dZ[i];
  }
  mw /= n;
  mz /= n;
  for (std::size_t i = 0; i < n; ++i) {
    vw += (table.dW[i] - mw) * (table.dW[i] - mw);
    vz += (table.dZ[i] - mz) * (table.dZ[i] - mz);
    cwz += (table.dW[i] - mw) * (table.dZ[i] - mz);
  }
  vw /= n;
  vz /= n;
  cwz /= n;
  const double nn = static_cast<double>(n);
  // 4-sigma bands; the fourth moments of Gaussians give Var(s^2) = 2 s^4.
  CHECK(std::abs(mw) < 4 * std::sqrt(dt / nn));
  CHECK(std::abs(mz) < 4 * std::sqrt(dt * dt * dt / 3 / nn));
  CHECK(std::abs(vw - dt) < 4 * dt * std::sqrt(2 / nn));
  const double vz_true = dt * dt * dt / 3;
  CHECK(std::abs(vz - vz_true) < 4 * vz_true * std::sqrt(2 / nn));
  const double c_true = dt * dt / 2;
  // Var of the product estimator is (Var W Var Z + Cov^2)/n.
  const double c_sd = std::sqrt((dt * vz_true + c_true * c_true) / nn);
  CHECK(std::abs(cwz - c_true) < 4 * c_sd);
}

TEST_CASE("coarsened increments equal increments of the summed path") {
  const auto fine = IncrementTable::sample(3, 0.25, 2, 8);
  const auto coarse = fine.coarsen(4);
  REQUIRE(coarse.steps() == 2);
  // Brute force: build W on the fine grid and integrate it exactly (piecewise
  // contributions dZ_k plus the rectangle h * W_k).
  for (std::size_t c = 0; c < 2; ++c) {
    double w = 0, z = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      z += fine.dZ[k * 2 + c] + 0.25 * w;
      w += fine.dW[k * 2 + c];
    }
    CHECK(coarse.dW[c] == doctest::Approx(w));
    CHECK(coarse.dZ[c] == doctest::Approx(z));
  }
  CHECK_THROWS_AS(fine.coarsen(3), ConfigError);
}

TEST_CASE("constant path for zero drift and zero noise") {
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = 25;
  cfg.initial_state = {1.0, 0.0};
  for (auto scheme : {Scheme::EulerMaruyama, Scheme::StrongRK15}) {
    cfg.scheme = scheme;
    const auto traj = integrate_path(zero_system(2), cfg);
    REQUIRE(traj.rows() == 26);
    for (std::size_t k = 0; k < traj.rows(); ++k) {
      CHECK(traj.at(k, 0) == 1.0);
      CHECK(traj.at(k, 1) == 0.0);
    }
  }
}

TEST_CASE("configuration errors") {
  IntegratorConfig cfg;
  cfg.initial_state = {0.0};
  cfg.dt = 0.0;
  CHECK_THROWS_AS(integrate_path(zero_system(1), cfg), ConfigError);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(integrate_path(zero_system(1), cfg), ConfigError);
  cfg.dt = 0.1;
  cfg.n_steps = 0;
  CHECK_THROWS_AS(integrate_path(zero_system(1), cfg), ConfigError);
  cfg.n_steps = 3;
  cfg.initial_state = {0.0, 1.0};
  CHECK_THROWS_AS(integrate_path(zero_system(1), cfg), ConfigError);
  CHECK_THROWS_AS(SdeSystem(2, [](std::span<const double>, std::span<double>) {}, Eigen::MatrixXd::Zero(2, 3)),
                  ConfigError);
}

TEST_CASE("divergence reports the step index") {
  // dx = x^2 dt from x0 = 1 blows up at t = 1.
  const auto sys = SdeSystem::deterministic(
      1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; });
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 5000;
  cfg.initial_state = {1.0};
  try {
    integrate_path(sys, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() > 900);
    CHECK(e.step() < 1100);
  }
}

TEST_CASE("identical seeds reproduce paths bit for bit") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 2000;
  cfg.initial_state = {0.3};
  cfg.seed = 42;
  const auto a = integrate_path(ou.system(), cfg);
  const auto b = integrate_path(ou.system(), cfg);
  CHECK(a.values == b.values);
  cfg.seed = 43;
  const auto c = integrate_path(ou.system(), cfg);
  CHECK(a.values != c.values);
}

TEST_CASE("OU long-run variance approaches sigma^2 / (2 lambda)") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 2'000'000;  // 2000 relaxation times 1/lambda ~ 0.16
  cfg.record_every = 10;
  cfg.initial_state = {0.0};
  cfg.seed = 5;
  const auto traj = integrate_path(ou.system(), cfg);
  const double var = sample_variance(traj.values, 1000);
  // Effective sample count ~ T * lambda; relative sd of the variance ~ sqrt(1/(T lambda)).
  CHECK(var == doctest::Approx(ou.stationary_variance()).epsilon(0.03));
}

TEST_CASE("ensembles: sub-seeds, reproducibility, order independence") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.n_steps = 300;
  cfg.initial_state = {0.0};
  cfg.seed = 11;

  const auto one = integrate_ensemble(ou.system(), cfg, 1);
  IntegratorConfig single = cfg;
  single.seed = derive_subseed(11, 0);
  CHECK(one.front().values == integrate_path(ou.system(), single).values);

  const auto par = integrate_ensemble(ou.system(), cfg, 16);
  const auto ser = serial::integrate_ensemble(ou.system(), cfg, 16);
  for (std::size_t k = 0; k < 16; ++k) CHECK(par[k].values == ser[k].values);
  CHECK(par[0].values != par[1].values);

  cfg.seed = 12;
  const auto other = integrate_ensemble(ou.system(), cfg, 16);
  for (std::size_t k = 0; k < 16; ++k) CHECK(other[k].values != par[k].values);
  CHECK_THROWS_AS(integrate_ensemble(ou.system(), cfg, 0), ConfigError);
}

TEST_CASE("ensemble of 100 OU paths: stationary variance within 3 standard errors") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 20000;
  cfg.burn_in = 2000;
  cfg.record_every = 20;
  cfg.initial_state = {0.0};
  cfg.seed = 2024;
  const auto paths = integrate_ensemble(ou.system(), cfg, 100);
  std::vector<double> per_path;
  for (const auto& p : paths) per_path.push_back(sample_variance(p.values));
  const double mean = std::accumulate(per_path.begin(), per_path.end(), 0.0) / 100.0;
  const double se = std::sqrt(sample_variance(per_path) / 99.0);
  CHECK(std::abs(mean - ou.stationary_variance()) < 3 * se + 0.01 * ou.stationary_variance());
}

TEST_CASE("ensemble errors carry the path index") {
  const auto sys = SdeSystem::isotropic(
      1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; }, 0.0);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.n_steps = 500;
  cfg.initial_state = {1.0};
  CHECK_THROWS_AS(integrate_ensemble(sys, cfg, 3), PathError);
}

TEST_CASE("OU one-step coefficients reproduce the exact transition variance") {
  for (double mu : {1e-4, 1e-2, 0.3, 0.5, 0.50001, 2.0, 10.0}) {
    const double h = 0.1;
    const double lambda = mu / h;
    const OuStep s(lambda, h);
    // Var(xi) via the covariance of (dW, dZ): [h, h^2/2; h^2/2, h^3/3].
    const double var = s.w_coef * s.w_coef * h + s.w_coef * s.z_coef * h * h +
                       s.z_coef * s.z_coef * h * h * h / 3 + s.residual_sd * s.residual_sd;
    const double exact = -std::expm1(-2 * mu) / (2 * lambda);
    CHECK(var == doctest::Approx(exact).epsilon(1e-10));
    // Cov(xi, dW) = (1 - e^{-mu}) / lambda.
    const double cov_w = s.w_coef * h + s.z_coef * h * h / 2;
    CHECK(cov_w == doctest::Approx(-std::expm1(-mu) / lambda).epsilon(1e-10));
  }
  // Small-step limit: projection residual ~ lambda^2 h^{5/2} / sqrt(720).
  const OuStep tiny(1.0, 1e-3);
  CHECK(tiny.residual_sd == doctest::Approx(std::sqrt(1e-15 / 720)).epsilon(1e-3));
}

TEST_CASE("strong order: Euler-Maruyama on OU is order 1 for additive noise") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  OrderStudyConfig cfg;
  cfg.dts = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  cfg.n_paths = 100;
  cfg.x0 = 0.3;
  const auto study = strong_order_estimate(ou, Scheme::EulerMaruyama, cfg);
  CHECK(study.slope > 0.8);
  CHECK(study.slope < 1.2);
}

TEST_CASE("strong order: RK15 on OU converges at least at order 1.5") {
  // Linear drift with additive noise cancels all order-2 error coefficients,
  // so the observed slope is 2 rather than 1.5.
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 1.0};
  OrderStudyConfig cfg;
  cfg.dts = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  cfg.n_paths = 100;
  cfg.x0 = 0.3;
  const auto study = strong_order_estimate(ou, Scheme::StrongRK15, cfg);
  CHECK(study.slope > 1.3);
  CHECK(study.slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("strong order: RK15 on a nonlinear drift is order 1.5") {
  // dx = -(x + x^3) dt + dW; reference from the same fine increments at 16x refinement.
  const auto sys = SdeSystem::isotropic(
      1, [](std::span<const double> x, std::span<double> out) { out[0] = -(x[0] + x[0] * x[0] * x[0]) + std::sin(3 * x[0]); }, 1.0);
  const std::vector<double> dts{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  const std::size_t refine = 64;
  const double h = dts.back() / refine;
  const std::size_t n_fine = static_cast<std::size_t>(std::lround(1.0 / h));
  std::vector<double> err(dts.size(), 0.0);
  const std::size_t paths = 200;
  for (std::size_t p = 0; p < paths; ++p) {
    const auto fine = IncrementTable::sample(derive_subseed(77, p), h, 1, n_fine);
    IntegratorConfig cfg;
    cfg.initial_state = {0.5};
    cfg.n_steps = n_fine;
    cfg.record_every = n_fine;
    const double ref = integrate_path(sys, cfg, fine).values.back();
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const auto coarse = fine.coarsen(static_cast<std::size_t>(std::lround(dts[i] / h)));
      cfg.n_steps = coarse.steps();
      cfg.record_every = cfg.n_steps;
      const double d = integrate_path(sys, cfg, coarse).values.back() - ref;
      err[i] += d * d;
    }
  }
  for (double& e : err) e = std::sqrt(e / paths);
  const double slope = loglog_slope(dts, err);
  CHECK(slope > 1.3);
  CHECK(slope < 1.7);
}

TEST_CASE("strong order: deterministic RK15 error slope is at least 2") {
  const OrnsteinUhlenbeck ou{2 * std::numbers::pi, 0.0};
  OrderStudyConfig cfg;
  cfg.dts = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  cfg.n_paths = 2;
  cfg.x0 = 1.0;
  const auto study = strong_order_estimate(ou, Scheme::StrongRK15, cfg);
  CHECK(study.slope >= 1.95);
}

TEST_CASE("strong_order_estimate rejects bad step lists") {
  const OrnsteinUhlenbeck ou{1.0, 1.0};
  OrderStudyConfig cfg;
  cfg.dts = {1e-2, 5e-3};
  CHECK_THROWS_AS(strong_order_estimate(ou, Scheme::StrongRK15, cfg), ConfigError);
  cfg.dts = {1e-2, 2e-2, 5e-3};
  CHECK_THROWS_AS(strong_order_estimate(ou, Scheme::StrongRK15, cfg), ConfigError);
}
