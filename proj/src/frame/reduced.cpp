#include "nlc/frame/reduced.hpp"

#include <cmath>
#include <exception>
#include <ostream>

#include "nlc/errors.hpp"
#include "nlc/io/csv.hpp"
#include "nlc/sde/increments.hpp"
#include "nlc/sde/philox.hpp"

namespace nlc::frame {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd ReducedModel::J0_at(double tau) const {
  const std::size_t m = J0.size();
  const auto [k, s] = detail::locate(tau, period, m);
  const std::size_t km = (k + m - 1) % m, k1 = (k + 1) % m, k2 = (k + 2) % m;
  const MatrixXd d0 = 0.5 * (J0[k1] - J0[km]);
  const MatrixXd d1 = 0.5 * (J0[k2] - J0[k]);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * J0[k] + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * J0[k1] +
         (s3 - s2) * d1;
}

double ReducedModel::speed_at(double tau) const { return detail::periodic_cubic(speed, tau, period); }

Eigen::MatrixXd monodromy(const ReducedModel& model) {
  const std::size_t m = model.J0.size();
  const auto d = static_cast<Eigen::Index>(model.deviation_dim());
  const double h = model.period / static_cast<double>(m);
  MatrixXd M = MatrixXd::Identity(d, d);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = h * static_cast<double>(k);
    const MatrixXd& a0 = model.J0[k];
    const MatrixXd am = model.J0_at(t + 0.5 * h);
    const MatrixXd& a1 = model.J0[(k + 1) % m];
    const MatrixXd k1 = a0 * M;
    const MatrixXd k2 = am * (M + 0.5 * h * k1);
    const MatrixXd k3 = am * (M + 0.5 * h * k2);
    const MatrixXd k4 = a1 * (M + h * k3);
    M += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return M;
}

ReducedModel reduce(const CycleParameterization& cycle, const ComovingFrame& frame, double sigma) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) throw ConfigError("reduce: sigma must be >= 0");
  const std::size_t m = cycle.points();
  if (frame.points() != m) throw ConfigError("reduce: cycle and frame grids differ");
  const auto n = static_cast<Eigen::Index>(cycle.dim());
  ReducedModel model;
  model.period = cycle.period;
  model.sigma = sigma;
  model.speed = cycle.speed;
  model.J0.resize(m);
  const MatrixXd& B = frame.basis_P0;
  for (std::size_t k = 0; k < m; ++k) {
    const VectorXd t = cycle.T.row(static_cast<Eigen::Index>(k)).transpose();
    const MatrixXd P = MatrixXd::Identity(n, n) - t * t.transpose();
    const MatrixXd UB = frame.U[k] * B;
    model.J0[k] = UB.transpose() * P * cycle.J[k] * UB;
  }
  const MatrixXd M = monodromy(model);
  model.monodromy_radius = M.eigenvalues().cwiseAbs().maxCoeff();
  if (!model.stable())
    model.warning = "monodromy spectral radius " + std::to_string(model.monodromy_radius) +
                    " >= 1: cycle not attracting or grid too coarse";
  return model;
}

ReducedPath simulate_reduced(const ReducedModel& model, const IntegratorConfig& config) {
  config.validate();
  const std::size_t d = model.deviation_dim();
  if (d == 0) throw ConfigError("simulate_reduced: empty model");
  const auto di = static_cast<Eigen::Index>(d);
  VectorXd z = VectorXd::Zero(di);
  double tau = 0.0;
  if (!config.initial_state.empty()) {
    if (config.initial_state.size() != d + 1)
      throw ConfigError("simulate_reduced: initial_state must be (z0..., tau0) of size " +
                        std::to_string(d + 1));
    for (std::size_t i = 0; i < d; ++i) z[static_cast<Eigen::Index>(i)] = config.initial_state[i];
    tau = config.initial_state[d];
  }

  const double dt = config.dt;
  const double sigma = model.sigma;
  GaussianIncrements gen(config.seed, dt, d + 1);
  std::vector<double> dW(d + 1), dZ(d + 1);

  ReducedPath out;
  out.dt = dt * static_cast<double>(config.record_every);
  out.seed = config.seed;
  const std::size_t rows = config.stored_rows();
  out.tau.reserve(rows);
  out.z.resize(static_cast<Eigen::Index>(rows), di);
  const auto record = [&] {
    out.z.row(static_cast<Eigen::Index>(out.tau.size())) = z.transpose();
    out.tau.push_back(tau);
  };
  if (config.burn_in == 0) record();

  VectorXd w(di), area(di);
  const std::size_t total = config.total_steps();
  for (std::size_t k = 0; k < total; ++k) {
    gen.draw(k, dW, dZ);
    for (Eigen::Index i = 0; i < di; ++i) {
      w[i] = dW[static_cast<std::size_t>(i)];
      area[i] = dZ[static_cast<std::size_t>(i)] - 0.5 * dt * w[i];
    }
    const MatrixXd a0 = model.J0_at(tau);
    const double tau_next = tau + dt + sigma / model.speed_at(tau) * dW[d];
    const MatrixXd a1 = model.J0_at(tau_next);
    const VectorXd zbar = z + dt * (a0 * z) + sigma * w;
    z += 0.5 * dt * (a0 * z + a1 * zbar) + sigma * w + sigma * (a0 * area);
    tau = tau_next;
    if (!std::isfinite(tau) || !z.allFinite() || z.cwiseAbs().maxCoeff() > kDivergenceBound)
      throw DivergenceError(k + 1, "simulate_reduced: state diverged");
    const std::size_t done = k + 1;
    if (done >= config.burn_in && (done - config.burn_in) % config.record_every == 0) record();
  }
  return out;
}

std::vector<ReducedPath> simulate_reduced_ensemble(const ReducedModel& model,
                                                   const IntegratorConfig& config,
                                                   std::size_t n_paths) {
  if (n_paths < 1) throw ConfigError("simulate_reduced_ensemble: n_paths must be >= 1");
  std::vector<ReducedPath> out(n_paths);
  std::vector<std::exception_ptr> errors(n_paths);
  const auto count = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    IntegratorConfig cfg = config;
    cfg.seed = derive_subseed(config.seed, idx);
    try {
      out[idx] = simulate_reduced(model, cfg);
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

Trajectory reconstruct(const CycleParameterization& cycle, const ComovingFrame& frame,
                       const ReducedPath& path) {
  const std::size_t n = cycle.dim();
  if (static_cast<std::size_t>(path.z.cols()) + 1 != n)
    throw ConfigError("reconstruct: deviation dimension does not match the cycle");
  if (static_cast<std::size_t>(path.z.rows()) != path.rows())
    throw ConfigError("reconstruct: tau and z series are not aligned");
  if (frame.points() != cycle.points()) throw ConfigError("reconstruct: cycle and frame grids differ");
  Trajectory traj;
  traj.dt = path.dt;
  traj.seed = path.seed;
  if (n == 2) {
    traj.channel_labels = {"x", "y"};
  } else {
    for (std::size_t i = 0; i < n; ++i) traj.channel_labels.push_back("y" + std::to_string(i));
  }
  traj.values.resize(path.rows() * n);
  const MatrixXd& B = frame.basis_P0;
  for (std::size_t k = 0; k < path.rows(); ++k) {
    const double tau = path.tau[k];
    const VectorXd y = cycle.state_at(tau) +
                       frame.U_at(tau) * (B * path.z.row(static_cast<Eigen::Index>(k)).transpose());
    for (std::size_t i = 0; i < n; ++i) traj.values[k * n + i] = y[static_cast<Eigen::Index>(i)];
  }
  return traj;
}

void write_csv(std::ostream& os, const ReducedPath& path) {
  const auto d = static_cast<std::size_t>(path.z.cols());
  std::vector<std::string> header{"t", "tau"};
  for (std::size_t i = 0; i < d; ++i) header.push_back("z" + std::to_string(i));
  io::CsvWriter w(os, header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < path.rows(); ++k) {
    row[0] = static_cast<double>(k) * path.dt;
    row[1] = path.tau[k];
    for (std::size_t i = 0; i < d; ++i)
      row[2 + i] = path.z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    w.row(row);
  }
}

}  // namespace nlc::frame
