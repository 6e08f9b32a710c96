#include "nlc/frame/cycle.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <ostream>
#include <string>

#include "nlc/errors.hpp"
#include "nlc/io/csv.hpp"

namespace nlc::frame {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

namespace {

struct Rhs {
  const SdeSystem* sys;
  void operator()(const State& x, State& dx, double /*t*/) const { sys->drift(x, dx); }
};

double norm(const State& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dot_offset(const State& n, const State& x, const State& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += n[i] * (x[i] - p[i]);
  return s;
}

double distance(const State& a, const State& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

using Dense = odeint::dense_output_runge_kutta<
    odeint::controlled_runge_kutta<odeint::runge_kutta_dopri5<State>>>;

class Searcher {
 public:
  Searcher(const SdeSystem& sys, const CycleOptions& opt)
      : sys_(sys), opt_(opt), rhs_{&sys},
        stepper_(odeint::make_dense_output(opt.ode_tol, opt.ode_tol, odeint::runge_kutta_dopri5<State>())) {}

  void check_fixed_point(const State& x) const {
    const auto f = sys_.drift(x);
    if (norm(f) < opt_.fixed_point_threshold * (1.0 + norm(x)))
      throw FixedPointError("find_limit_cycle: flow converged to a fixed point");
  }

  /// Integrates from x for `duration` and returns the end state.
  State advance(State x, double duration) {
    if (duration <= 0) return x;
    odeint::integrate_adaptive(stepper_, rhs_, x, 0.0, duration, opt_.initial_step);
    return x;
  }

  /// First return of the orbit from p to the section through p normal to f(p).
  struct Return {
    double time;
    State point;
    double excursion;  ///< largest distance from p along the way
  };

  /// First return to the section through p normal to f(p). A crossing far from p
  /// (beyond half the largest excursion) means the orbit is still in transit; the
  /// section is then moved to that crossing and the search restarts there.
  Return first_return(State p) {
    check_fixed_point(p);
    State n = unit_drift(p);
    stepper_.initialize(p, 0.0, opt_.initial_step);
    double start = 0.0;
    double excursion = 0.0;
    double g_prev = 0.0;
    State x(p.size());
    while (true) {
      const auto [t0, t1] = stepper_.do_step(rhs_);
      const State& cur = stepper_.current_state();
      elapsed_ += t1 - t0;
      if (!std::isfinite(norm(cur)) || norm(cur) > 1e6)
        throw NoCycleError("find_limit_cycle: orbit diverged");
      if (elapsed_ > opt_.max_time)
        throw NoCycleError("find_limit_cycle: no section return within time " +
                           std::to_string(opt_.max_time));
      const double dist = distance(cur, p);
      const double g = dot_offset(n, cur, p);
      if (g_prev < 0.0 && g >= 0.0) {
        const double t = refine(n, p, t0, t1, g_prev, g);
        stepper_.calc_state(t, x);
        if (distance(x, p) < 0.5 * excursion) return {t - start, x, excursion};
        p = x;
        check_fixed_point(p);
        n = unit_drift(p);
        start = t;
        excursion = distance(cur, p);
        g_prev = dot_offset(n, cur, p);
        continue;
      }
      excursion = std::max(excursion, dist);
      g_prev = g;
      if (dist < 1e-3 * excursion) check_fixed_point(cur);
    }
  }

 private:
  State unit_drift(const State& p) const {
    State n = sys_.drift(p);
    const double fn = norm(n);
    for (double& v : n) v /= fn;
    return n;
  }

  /// Illinois-style regula falsi with bisection fallback on the dense output.
  double refine(const State& n, const State& p, double a, double b, double ga, double gb) {
    State x(p.size());
    for (int it = 0; it < 200; ++it) {
      double t = b - gb * (b - a) / (gb - ga);
      if (!(t > a && t < b)) t = 0.5 * (a + b);
      stepper_.calc_state(t, x);
      const double g = dot_offset(n, x, p);
      if (g == 0.0) return t;
      if ((g < 0.0) == (ga < 0.0)) {
        a = t;
        ga = g;
        gb *= 0.5;
      } else {
        b = t;
        gb = g;
        ga *= 0.5;
      }
      if (b - a <= 1e-12 * b) break;
    }
    return 0.5 * (a + b);
  }

  const SdeSystem& sys_;
  const CycleOptions& opt_;
  Rhs rhs_;
  Dense stepper_;
  double elapsed_ = 0.0;
};

}  // namespace

namespace detail {

std::pair<std::size_t, double> locate(double tau, double period, std::size_t m) {
  double u = std::fmod(tau, period);
  if (u < 0) u += period;
  const double pos = u / period * static_cast<double>(m);
  auto k = static_cast<std::size_t>(pos);
  double s = pos - static_cast<double>(k);
  if (k >= m) {
    k = 0;
    s = 0.0;
  }
  return {k, s};
}

double periodic_cubic(const std::vector<double>& y, double tau, double period) {
  const std::size_t m = y.size();
  const auto [k, s] = locate(tau, period, m);
  const std::size_t km = (k + m - 1) % m, k1 = (k + 1) % m, k2 = (k + 2) % m;
  const double d0 = 0.5 * (y[k1] - y[km]);
  const double d1 = 0.5 * (y[k2] - y[k]);
  return hermite(y[k], y[k1], d0, d1, s);
}

}  // namespace detail

Eigen::VectorXd CycleParameterization::state_at(double tau) const {
  const std::size_t m = points();
  const auto [k, s] = detail::locate(tau, period, m);
  const std::size_t k1 = (k + 1) % m;
  const double h = step();
  Eigen::VectorXd out(dim());
  for (Eigen::Index i = 0; i < L.cols(); ++i)
    out[i] = detail::hermite(L(k, i), L(k1, i), h * f_on_L(k, i), h * f_on_L(k1, i), s);
  return out;
}

double CycleParameterization::speed_at(double tau) const {
  return detail::periodic_cubic(speed, tau, period);
}

CycleParameterization find_limit_cycle(const SdeSystem& ode, const Eigen::VectorXd& initial_guess,
                                       const CycleOptions& options) {
  const std::size_t n = ode.dim();
  if (static_cast<std::size_t>(initial_guess.size()) != n)
    throw ConfigError("find_limit_cycle: initial guess has dimension " +
                      std::to_string(initial_guess.size()) + ", system has " + std::to_string(n));
  if (n < 2) throw ConfigError("find_limit_cycle: need at least 2 dimensions");
  if (options.grid_points < 8) throw ConfigError("find_limit_cycle: need at least 8 grid points");
  if (!(options.tol > 0)) throw ConfigError("find_limit_cycle: tol must be positive");

  Searcher search(ode, options);
  State p(initial_guess.data(), initial_guess.data() + n);
  p = search.advance(p, options.transient_time);

  double period = 0.0;
  bool converged = false;
  for (std::size_t i = 0; i < options.max_returns && !converged; ++i) {
    auto ret = search.first_return(p);
    converged = distance(ret.point, p) < options.tol * norm(p) + options.tol;
    if (converged && ret.excursion < 100.0 * (options.tol * norm(p) + options.tol))
      throw FixedPointError("find_limit_cycle: orbit collapsed onto a fixed point");
    period = ret.time;
    p = std::move(ret.point);
  }
  if (!converged)
    throw NoCycleError("find_limit_cycle: section returns did not converge after " +
                       std::to_string(options.max_returns) + " returns");

  const std::size_t m = options.grid_points;
  CycleParameterization c;
  c.period = period;
  c.grid.resize(m);
  std::vector<double> times(m + 1);
  for (std::size_t k = 0; k <= m; ++k) times[k] = period * static_cast<double>(k) / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) c.grid[k] = times[k];
  c.L.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  State end;
  State x = p;
  auto controlled = odeint::make_controlled(options.ode_tol, options.ode_tol,
                                            odeint::runge_kutta_dopri5<State>());
  std::size_t row = 0;
  odeint::integrate_times(controlled, Rhs{&ode}, x, times.begin(), times.end(),
                          options.initial_step, [&](const State& s, double) {
                            if (row < m) {
                              for (std::size_t i = 0; i < n; ++i)
                                c.L(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = s[i];
                            } else {
                              end = s;
                            }
                            ++row;
                          });
  c.closure_error = distance(end, p);
  if (!(c.closure_error < options.tol * norm(p) + options.tol))
    throw NoCycleError("find_limit_cycle: cycle does not close (error " +
                       std::to_string(c.closure_error) + ")");

  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  c.f_on_L.resize(rows, cols);
  c.T.resize(rows, cols);
  c.Tdot.resize(rows, cols);
  c.J.resize(m);
  c.kappa.resize(m);
  c.speed.resize(m);
  State f(n);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::VectorXd l = c.L.row(k).transpose();
    ode.drift(std::span<const double>(l.data(), n), f);
    const Eigen::Map<const Eigen::VectorXd> fv(f.data(), cols);
    const double sp = fv.norm();
    const Eigen::VectorXd t = fv / sp;
    const auto ku = static_cast<std::size_t>(k);
    c.J[ku] = ode.jacobian_at(std::span<const double>(l.data(), n));
    const Eigen::VectorXd jt = c.J[ku] * t;
    const Eigen::VectorXd td = jt - t * t.dot(jt);
    c.f_on_L.row(k) = fv.transpose();
    c.T.row(k) = t.transpose();
    c.Tdot.row(k) = td.transpose();
    c.speed[ku] = sp;
    c.kappa[ku] = td.norm() / sp;
  }
  return c;
}

void write_csv(std::ostream& os, const CycleParameterization& cycle) {
  const std::size_t n = cycle.dim();
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < n; ++i) header.push_back("L" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) header.push_back("T" + std::to_string(i));
  header.push_back("speed");
  header.push_back("kappa");
  io::CsvWriter w(os, header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < cycle.points(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    row[0] = cycle.grid[k];
    for (std::size_t i = 0; i < n; ++i) {
      row[1 + i] = cycle.L(kk, static_cast<Eigen::Index>(i));
      row[1 + n + i] = cycle.T(kk, static_cast<Eigen::Index>(i));
    }
    row[1 + 2 * n] = cycle.speed[k];
    row[2 + 2 * n] = cycle.kappa[k];
    w.row(row);
  }
}

}  // namespace nlc::frame
