#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlc/analysis/acv.hpp"
#include "nlc/errors.hpp"
#include "nlc/frame/comoving.hpp"
#include "nlc/frame/cycle.hpp"
#include "nlc/frame/presets.hpp"
#include "nlc/frame/reduced.hpp"
#include "nlc/hopf/hopf.hpp"

using namespace nlc;
using namespace nlc::frame;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using std::numbers::pi;

namespace {

// Van der Pol, mu = 1: fixed-step RK4 at h = 4e-3, 2e-3, 1e-3 with Richardson
// extrapolation on successive upward crossings of y = 0.
constexpr double kVdpPeriod = 6.6632868593;

hopf::HopfParams unit_hopf(double lambda = 2 * pi) { return {2 * pi, 2 * pi, lambda, 1.0, 0.0}; }

struct Built {
  CycleParameterization cycle;
  ComovingFrame frame;
};

Built build(const SdeSystem& sys, VectorXd guess, std::size_t m = 1024) {
  CycleOptions opt;
  opt.grid_points = m;
  auto cycle = find_limit_cycle(sys, guess, opt);
  auto frame = build_frame(sys, cycle);
  return {std::move(cycle), std::move(frame)};
}

Built vdp(std::size_t m = 1024) { return build(van_der_pol(1.0), VectorXd::Unit(2, 0) * 2.0, m); }
Built hopf_cycle(double lambda = 2 * pi) {
  return build(hopf::hopf_system(unit_hopf(lambda)), VectorXd::Unit(2, 0));
}

// Fourth-order periodic central difference of the tangent samples.
VectorXd tangent_rate(const CycleParameterization& c, std::size_t k) {
  const std::size_t m = c.points();
  const auto row = [&](long d) {
    return VectorXd(c.T.row(static_cast<Eigen::Index>((k + m + static_cast<std::size_t>(d + 2) - 2) % m)).transpose());
  };
  return (row(-2) - 8 * row(-1) + 8 * row(1) - row(2)) / (12 * c.step());
}

void check_frame_invariants(const Built& b) {
  const auto& c = b.cycle;
  const auto& f = b.frame;
  const VectorXd t0 = c.T.row(0).transpose();
  const MatrixXd eye = MatrixXd::Identity(2, 2);
  CHECK((f.U[0] - eye).norm() == 0.0);
  double orth = 0, tang = 0, perp = 0, norm_gap = 0, fd_gap = 0, kappa_gap = 0;
  for (std::size_t k = 0; k < c.points(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const VectorXd tk = c.T.row(kk).transpose();
    CHECK(std::abs(tk.norm() - 1.0) < 1e-10);
    CHECK(tk.dot(c.f_on_L.row(kk).transpose()) > 0);
    orth = std::max(orth, (f.U[k].transpose() * f.U[k] - eye).norm());
    tang = std::max(tang, (f.U[k] * t0 - tk).norm());
    const VectorXd vz = f.V[k] * f.basis_P0.col(0);
    const VectorXd p_vz = vz - tk * tk.dot(vz);
    perp = std::max(perp, p_vz.norm());
    const double vnorm = f.V[k].operatorNorm();
    const VectorXd tdot = c.Tdot.row(kk).transpose();
    norm_gap = std::max(norm_gap, std::abs(vnorm - tdot.norm()));
    const VectorXd fd = tangent_rate(c, k);
    fd_gap = std::max(fd_gap, std::abs(vnorm - fd.norm()) / (1.0 + fd.norm()));
    kappa_gap = std::max(kappa_gap, std::abs(c.kappa[k] * c.speed[k] - fd.norm()) / (1.0 + fd.norm()));
  }
  CHECK(orth < 1e-8);
  CHECK(tang < 1e-6);
  CHECK(perp < 1e-6);
  CHECK(norm_gap < 1e-6);
  CHECK(fd_gap < 1e-5);
  CHECK(kappa_gap < 1e-5);
}

}  // namespace

TEST_CASE("Hopf cycle: period 1 and unit radius") {
  const auto c = find_limit_cycle(hopf::hopf_system(unit_hopf()), VectorXd::Unit(2, 0));
  CHECK(std::abs(c.period - 1.0) < 1e-6);
  CHECK(c.points() == 1024);
  for (Eigen::Index k = 0; k < c.L.rows(); ++k) CHECK(std::abs(c.L.row(k).norm() - 1.0) < 1e-8);
  CHECK(c.closure_error < 1e-8);
  for (double kappa : c.kappa) CHECK(kappa == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Hopf cycle found from off the cycle") {
  auto p = unit_hopf();
  p.alpha0 = 3.0;
  const auto c = find_limit_cycle(hopf::hopf_system(p), VectorXd::Constant(2, 0.2));
  CHECK(std::abs(c.period - 1.0) < 1e-6);
  for (Eigen::Index k = 0; k < c.L.rows(); ++k) CHECK(std::abs(c.L.row(k).norm() - 1.0) < 1e-7);
}

TEST_CASE("van der Pol period against the extrapolated oracle") {
  const auto c = find_limit_cycle(van_der_pol(1.0), VectorXd::Unit(2, 0) * 2.0);
  CHECK(std::abs(c.period - kVdpPeriod) < 1e-6);
  // Cycle sample interpolation reproduces a midpoint within Hermite error.
  CycleOptions opt;
  opt.grid_points = 2048;
  const auto fine = find_limit_cycle(van_der_pol(1.0), VectorXd::Unit(2, 0) * 2.0, opt);
  for (std::size_t k = 0; k < 1024; k += 37) {
    const VectorXd mid = c.state_at(c.grid[k] + 0.5 * c.step());
    CHECK((mid - fine.L.row(static_cast<Eigen::Index>(2 * k + 1)).transpose()).norm() < 1e-7);
  }
}

TEST_CASE("stable focus and divergent flows are rejected") {
  auto spiral = SdeSystem::deterministic(2, [](std::span<const double> s, std::span<double> out) {
    out[0] = -0.5 * s[0] - 3.0 * s[1];
    out[1] = 3.0 * s[0] - 0.5 * s[1];
  });
  CHECK_THROWS_AS(find_limit_cycle(spiral, VectorXd::Unit(2, 0)), FixedPointError);
  auto at_rest = SdeSystem::deterministic(2, [](std::span<const double> s, std::span<double> out) {
    out[0] = -s[0];
    out[1] = -s[1];
  });
  CHECK_THROWS_AS(find_limit_cycle(at_rest, VectorXd::Zero(2)), FixedPointError);
  auto drift_off = SdeSystem::deterministic(2, [](std::span<const double>, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
  });
  CHECK_THROWS_AS(find_limit_cycle(drift_off, VectorXd::Zero(2)), NoCycleError);
  CHECK_THROWS_AS(find_limit_cycle(drift_off, VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("Hopf frame is the rotation by alpha t") {
  const auto b = hopf_cycle();
  check_frame_invariants(b);
  for (std::size_t k = 0; k < b.frame.points(); k += 64) {
    const double a = 2 * pi * b.cycle.grid[k];
    MatrixXd rot(2, 2);
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    CHECK((b.frame.U[k] - rot).norm() < 1e-8);
  }
  const VectorXd e1 = b.frame.U_at(0.25) * VectorXd::Unit(2, 0);
  CHECK(std::abs(e1[0]) < 1e-6);
  CHECK(std::abs(e1[1] - 1.0) < 1e-6);
  CHECK((b.frame.basis_P0.col(0) - VectorXd::Unit(2, 0)).norm() < 1e-8);
}

TEST_CASE("van der Pol frame invariants") { check_frame_invariants(vdp()); }

TEST_CASE("frame is consistent under grid doubling") {
  const auto coarse = vdp(1024);
  const auto fine = vdp(2048);
  double gap = 0.0;
  for (std::size_t k = 0; k < 1024; ++k)
    gap = std::max(gap, (coarse.frame.U[k] - fine.frame.U[2 * k]).operatorNorm());
  CHECK(gap < 1e-6);
}

TEST_CASE("normal basis completes the tangent deterministically") {
  VectorXd t(3);
  t << 1.0, 2.0, 2.0;
  t /= 3.0;
  const MatrixXd b = normal_basis(t);
  CHECK(b.cols() == 2);
  CHECK((b.transpose() * b - MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK((b.transpose() * t).norm() < 1e-14);
  CHECK(b(0, 0) > 0);
}

TEST_CASE("Hopf reduction gives J0 = -lambda") {
  for (double lambda : {2 * pi, 1.0}) {
    const auto b = hopf_cycle(lambda);
    const auto model = reduce(b.cycle, b.frame, 0.1);
    for (const auto& j0 : model.J0) {
      REQUIRE(j0.rows() == 1);
      CHECK(std::abs(j0(0, 0) + lambda) < 1e-6);
    }
    CHECK(model.monodromy_radius == doctest::Approx(std::exp(-lambda)).epsilon(1e-8));
    CHECK(model.stable());
    CHECK(model.warning.empty());
  }
}

TEST_CASE("van der Pol: loop integral of J0 is the log Floquet multiplier") {
  const auto b = vdp();
  const auto model = reduce(b.cycle, b.frame, 0.0);
  double integral = 0.0;
  for (const auto& j0 : model.J0) integral += j0(0, 0) * b.cycle.step();

  // Variational equation around the cycle, RK4 with its own fine step.
  const auto sys = van_der_pol(1.0);
  const std::size_t steps = 40000;
  const double h = b.cycle.period / double(steps);
  VectorXd x = b.cycle.L.row(0).transpose();
  MatrixXd phi = MatrixXd::Identity(2, 2);
  const auto rhs = [&](const VectorXd& s, const MatrixXd& p, VectorXd& dx, MatrixXd& dp) {
    dx = VectorXd(2);
    dx << s[1], (1 - s[0] * s[0]) * s[1] - s[0];
    MatrixXd j(2, 2);
    j << 0, 1, -2 * s[0] * s[1] - 1, 1 - s[0] * s[0];
    dp = j * p;
  };
  VectorXd a1, a2, a3, a4;
  MatrixXd b1, b2, b3, b4;
  for (std::size_t i = 0; i < steps; ++i) {
    rhs(x, phi, a1, b1);
    rhs(x + 0.5 * h * a1, phi + 0.5 * h * b1, a2, b2);
    rhs(x + 0.5 * h * a2, phi + 0.5 * h * b2, a3, b3);
    rhs(x + h * a3, phi + h * b3, a4, b4);
    x += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
    phi += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
  }
  const auto ev = phi.eigenvalues();
  const double m1 = std::abs(ev[0]), m2 = std::abs(ev[1]);
  const double trivial = std::abs(m1 - 1) < std::abs(m2 - 1) ? m1 : m2;
  const double nontrivial = trivial == m1 ? m2 : m1;
  CHECK(trivial == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(integral == doctest::Approx(std::log(nontrivial)).epsilon(1e-6));
  CHECK(model.monodromy_radius == doctest::Approx(nontrivial).epsilon(1e-6));
}

TEST_CASE("reduced model, deterministic limit") {
  const auto b = vdp();
  const auto model = reduce(b.cycle, b.frame, 0.0);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 20000;
  cfg.record_every = 100;
  cfg.initial_state = {0.5, 0.3};
  const auto path = simulate_reduced(model, cfg);
  for (std::size_t k = 0; k < path.rows(); ++k)
    CHECK(path.tau[k] == doctest::Approx(0.3 + double(k) * 0.1).epsilon(1e-12));
  CHECK(std::abs(path.z(static_cast<Eigen::Index>(path.rows() - 1), 0)) < 1e-3);

  ReducedPath on_cycle;
  on_cycle.dt = 0.01;
  on_cycle.z = MatrixXd::Zero(700, 1);
  for (std::size_t k = 0; k < 700; ++k) on_cycle.tau.push_back(0.01 * double(k));
  const auto traj = reconstruct(b.cycle, b.frame, on_cycle);
  // Compare against the stored samples wherever tau hits the grid closely.
  for (std::size_t k = 0; k < 700; ++k) {
    const VectorXd y(Eigen::Map<const VectorXd>(traj.row(k).data(), 2));
    CHECK((y - b.cycle.state_at(on_cycle.tau[k])).norm() < 1e-12);
  }
  CHECK((Eigen::Map<const VectorXd>(traj.row(0).data(), 2) - b.cycle.L.row(0).transpose()).norm() < 1e-14);
}

TEST_CASE("reduced Hopf model: OU deviation and diffusing phase") {
  const auto p = hopf::HopfParams::with_nsr(2 * pi, 2 * pi, 2 * pi, 1.0, 0.1);
  const auto b = hopf_cycle();
  const auto model = reduce(b.cycle, b.frame, p.sigma);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 2000000;
  cfg.record_every = 10;
  cfg.seed = 5;
  const auto path = simulate_reduced(model, cfg);
  std::vector<double> z(path.rows());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = path.z(static_cast<Eigen::Index>(k), 0);
  const auto acv = analysis::sample_acv(z, path.dt, 1.0);
  std::vector<double> ou(acv.size());
  for (std::size_t k = 0; k < ou.size(); ++k)
    ou[k] = p.sigma * p.sigma / (2 * p.lambda) * std::exp(-p.lambda * acv.lags[k]);
  CHECK(analysis::relative_l2(acv.values, ou) < 0.1);

  cfg.n_steps = 1000;
  cfg.record_every = 1000;
  const auto paths = simulate_reduced_ensemble(model, cfg, 2000);
  double var = 0.0;
  for (const auto& q : paths) var += std::pow(q.tau.back() - 1.0, 2) / double(paths.size());
  CHECK(var == doctest::Approx(p.sigma * p.sigma / std::pow(p.alpha * p.r, 2)).epsilon(0.1));
}

TEST_CASE("reconstruction matches the linear Hopf model on shared noise") {
  const auto p = hopf::HopfParams::with_nsr(2 * pi, 2 * pi, 2 * pi, 1.0, 0.1);
  const auto b = hopf_cycle();
  const auto model = reduce(b.cycle, b.frame, p.sigma);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_steps = 20000;
  cfg.record_every = 10;
  cfg.seed = 99;
  const auto red = simulate_reduced(model, cfg);
  const auto traj = reconstruct(b.cycle, b.frame, red);
  hopf::LinearModelOptions lo;
  lo.leading_order = true;
  const auto lin = hopf::simulate_hopf_linear(p, cfg, lo);
  REQUIRE(lin.rows() == traj.rows());
  double gap = 0.0, perp = 0.0;
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    gap = std::max(gap, std::hypot(traj.at(k, 0) - lin.x[k], traj.at(k, 1) - lin.y[k]));
    const VectorXd dev = Eigen::Map<const VectorXd>(traj.row(k).data(), 2) - b.cycle.state_at(red.tau[k]);
    const double a = 2 * pi * red.tau[k];
    perp = std::max(perp, std::abs(dev.dot(Eigen::Vector2d(-std::sin(a), std::cos(a)))));
  }
  CHECK(gap < 1e-5);
  CHECK(perp < 1e-6);
}

TEST_CASE("reduced model preconditions") {
  const auto b = hopf_cycle();
  CHECK_THROWS_AS(reduce(b.cycle, b.frame, -1.0), ConfigError);
  const auto model = reduce(b.cycle, b.frame, 0.1);
  IntegratorConfig cfg;
  cfg.initial_state = {1.0};
  CHECK_THROWS_AS(simulate_reduced(model, cfg), ConfigError);
}
