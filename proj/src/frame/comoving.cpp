#include "nlc/frame/comoving.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "nlc/errors.hpp"
#include "nlc/io/csv.hpp"

namespace nlc::frame {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Right-hand side of the joint (cycle state, frame) system.
class FrameRhs {
 public:
  FrameRhs(const SdeSystem& ode, const VectorXd& t0)
      : ode_(ode), t0_(t0), p0_(MatrixXd::Identity(t0.size(), t0.size()) - t0 * t0.transpose()),
        f_(static_cast<std::size_t>(t0.size())) {}

  /// Writes dx = f(x) and dU; also returns T and Tdot through members.
  void operator()(const VectorXd& x, const MatrixXd& U, VectorXd& dx, MatrixXd& dU) {
    const std::size_t n = f_.size();
    ode_.drift(std::span<const double>(x.data(), n), f_);
    dx = Eigen::Map<const VectorXd>(f_.data(), x.size());
    const double sp = dx.norm();
    const VectorXd t = dx / sp;
    const MatrixXd jac = ode_.jacobian_at(std::span<const double>(x.data(), n));
    const VectorXd jt = jac * t;
    const VectorXd td = jt - t * t.dot(jt);
    dU = -t * (td.transpose() * U * p0_) + td * t0_.transpose();
  }

 private:
  const SdeSystem& ode_;
  VectorXd t0_;
  MatrixXd p0_;
  std::vector<double> f_;
};

MatrixXd nearest_orthogonal(const MatrixXd& a) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

Eigen::MatrixXd normal_basis(const Eigen::VectorXd& t0) {
  const auto n = t0.size();
  MatrixXd q(n, n);
  q.col(0) = t0.normalized();
  Eigen::Index found = 1;
  for (Eigen::Index i = 0; i < n && found < n; ++i) {
    VectorXd v = VectorXd::Unit(n, i);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < found; ++j) v -= q.col(j) * q.col(j).dot(v);
    const double len = v.norm();
    if (len < 1e-6) continue;
    q.col(found++) = v / len;
  }
  return q.rightCols(n - 1);
}

Eigen::MatrixXd ComovingFrame::U_at(double tau) const {
  const std::size_t m = points();
  const auto [k, s] = detail::locate(tau, period, m);
  const std::size_t k1 = (k + 1) % m;
  const double h = period / static_cast<double>(m);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * U[k] + (s3 - 2 * s2 + s) * h * V[k] + (-2 * s3 + 3 * s2) * U[k1] +
         (s3 - s2) * h * V[k1];
}

ComovingFrame build_frame(const SdeSystem& ode, const CycleParameterization& cycle,
                          const FrameOptions& options) {
  const std::size_t m = cycle.points();
  const auto n = static_cast<Eigen::Index>(cycle.dim());
  if (m < 2 || n < 2) throw ConfigError("build_frame: empty cycle");
  if (ode.dim() != cycle.dim()) throw ConfigError("build_frame: system and cycle dimensions differ");
  if (options.substeps < 1) throw ConfigError("build_frame: substeps must be >= 1");

  const VectorXd t0 = cycle.T.row(0).transpose();
  FrameRhs rhs(ode, t0);
  ComovingFrame frame;
  frame.period = cycle.period;
  frame.basis_P0 = normal_basis(t0);
  frame.U.resize(m);
  frame.V.resize(m);

  const double h = cycle.step() / static_cast<double>(options.substeps);
  const MatrixXd eye = MatrixXd::Identity(n, n);
  MatrixXd U = eye;
  VectorXd k1x, k2x, k3x, k4x;
  MatrixXd k1u, k2u, k3u, k4u;
  for (std::size_t k = 0; k < m; ++k) {
    VectorXd x = cycle.L.row(static_cast<Eigen::Index>(k)).transpose();
    frame.U[k] = U;
    rhs(x, U, k1x, frame.V[k]);
    if (k + 1 == m) break;
    for (std::size_t j = 0; j < options.substeps; ++j) {
      rhs(x, U, k1x, k1u);
      rhs(x + 0.5 * h * k1x, U + 0.5 * h * k1u, k2x, k2u);
      rhs(x + 0.5 * h * k2x, U + 0.5 * h * k2u, k3x, k3u);
      rhs(x + h * k3x, U + h * k3u, k4x, k4u);
      x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
      U += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    }
    const double drift = (U.transpose() * U - eye).norm();
    if (!(drift <= options.max_drift))
      throw StepSizeError("build_frame: U lost orthogonality (" + std::to_string(drift) +
                          ") at sample " + std::to_string(k + 1) + "; use a finer grid");
    U = nearest_orthogonal(U);
  }
  return frame;
}

void write_csv(std::ostream& os, const ComovingFrame& frame) {
  const auto n = frame.U.empty() ? 0 : frame.U[0].rows();
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) header.push_back("U_" + std::to_string(i) + "_" + std::to_string(j));
  io::CsvWriter w(os, header);
  std::vector<double> row(header.size());
  const double h = frame.period / static_cast<double>(frame.points());
  for (std::size_t k = 0; k < frame.points(); ++k) {
    row[0] = h * static_cast<double>(k);
    std::size_t c = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) row[c++] = frame.U[k](i, j);
    w.row(row);
  }
}

FrameResiduals frame_residuals(const CycleParameterization& cycle, const ComovingFrame& frame) {
  if (frame.points() != cycle.points())
    throw ConfigError("frame_residuals: frame and cycle grids differ");
  const auto n = static_cast<Eigen::Index>(cycle.dim());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd t0 = cycle.T.row(0).transpose();
  FrameResiduals out;
  for (std::size_t k = 0; k < cycle.points(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const auto& u = frame.U[k];
    out.orthogonality = std::max(out.orthogonality, (u.transpose() * u - eye).operatorNorm());
    out.tangent_transport =
        std::max(out.tangent_transport, (u * t0 - cycle.T.row(kk).transpose()).norm());
    out.rate_identity = std::max(
        out.rate_identity, std::abs(frame.V[k].operatorNorm() - cycle.Tdot.row(kk).norm()));
  }
  return out;
}

}  // namespace nlc::frame
