#include "nlc/fit/fit.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "nlc/analysis/templates.hpp"
#include "nlc/sde/philox.hpp"

namespace nlc::fit {

using hopf::HopfParams;

namespace {

constexpr std::size_t kRestarts = 5;
constexpr std::size_t kPolish = 3;
constexpr std::size_t kMaxIterations = 5000;
constexpr double kDefaultRange = 1e4;
constexpr double kSizeTolerance = 1e-10;
constexpr double kJitter = 0.2;
constexpr std::uint64_t kJitterSeed = 0x6a177e5eedULL;

struct ZeroCrossing {
  double at;
  std::size_t after;  ///< index of the first sample past the crossing
};

std::vector<ZeroCrossing> zero_crossings(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<ZeroCrossing> out;
  for (std::size_t k = 1; k < y.size(); ++k) {
    if ((y[k - 1] > 0) != (y[k] > 0) && y[k - 1] != y[k]) {
      const double f = y[k - 1] / (y[k - 1] - y[k]);
      out.push_back({x[k - 1] + f * (x[k] - x[k - 1]), k});
    }
  }
  return out;
}

/// Vertex of the parabola through three points around index k (clamped to the bracket).
std::pair<double, double> parabolic_peak(const std::vector<double>& x, const std::vector<double>& y,
                                         std::size_t k) {
  if (k == 0 || k + 1 >= y.size()) return {x[k], y[k]};
  const double y0 = y[k - 1], y1 = y[k], y2 = y[k + 1];
  const double denom = y0 - 2 * y1 + y2;
  if (denom == 0.0) return {x[k], y1};
  const double d = std::clamp(0.5 * (y0 - y2) / denom, -1.0, 1.0);
  const double h = d >= 0 ? x[k + 1] - x[k] : x[k] - x[k - 1];
  return {x[k] + d * h, y1 - 0.25 * (y0 - y2) * d};
}

struct Lobe {
  double at;
  double height;  ///< |ACV| at the lobe extremum
};

/// Extremum of |ACV| between consecutive zero crossings (the first lobe is u = 0).
std::vector<Lobe> lobes(const std::vector<double>& u, const std::vector<double>& acv,
                        const std::vector<ZeroCrossing>& zc) {
  std::vector<Lobe> out{{u[0], std::abs(acv[0])}};
  std::vector<double> mag(acv.size());
  for (std::size_t k = 0; k < acv.size(); ++k) mag[k] = std::abs(acv[k]);
  for (std::size_t j = 0; j + 1 < zc.size(); ++j) {
    const std::size_t a = zc[j].after, b = zc[j + 1].after;
    if (b <= a) continue;
    const auto it = std::max_element(mag.begin() + static_cast<std::ptrdiff_t>(a),
                                     mag.begin() + static_cast<std::ptrdiff_t>(b));
    const auto [at, h] = parabolic_peak(u, mag, static_cast<std::size_t>(it - mag.begin()));
    out.push_back({at, h});
  }
  return out;
}

HopfParams guess_acv(const std::vector<double>& u, const std::vector<double>& acv) {
  if (!(acv[0] > 0)) throw GuessFailure("initial_guess: ACV(0) must be positive");
  const auto zc = zero_crossings(u, acv);
  if (zc.size() < 2)
    throw GuessFailure("initial_guess: no oscillation in the ACV (fewer than 2 zero crossings); supply initial parameters");
  const double spacing = (zc.back().at - zc.front().at) / static_cast<double>(zc.size() - 1);
  const double alpha = std::numbers::pi / spacing;

  auto lb = lobes(u, acv, zc);
  std::vector<Lobe> tail;
  for (std::size_t j = 1; j < lb.size(); ++j)
    if (lb[j].height > 0.05 * acv[0]) tail.push_back(lb[j]);
  if (tail.empty()) tail.push_back(lb.size() > 1 ? lb[1] : lb[0]);

  // log|A| = c - (s/2) u over the lobes past u = 0.
  double c = std::log(acv[0]), slope = 0.0;
  if (tail.size() >= 2) {
    double mu = 0, ml = 0;
    for (const auto& l : tail) {
      mu += l.at;
      ml += std::log(l.height);
    }
    mu /= static_cast<double>(tail.size());
    ml /= static_cast<double>(tail.size());
    double sxy = 0, sxx = 0;
    for (const auto& l : tail) {
      sxy += (l.at - mu) * (std::log(l.height) - ml);
      sxx += (l.at - mu) * (l.at - mu);
    }
    slope = sxx > 0 ? sxy / sxx : 0.0;
    c = ml - slope * mu;
  } else if (tail[0].at > 0) {
    slope = (std::log(tail[0].height) - std::log(acv[0])) / tail[0].at;
  }
  const double s = std::max(-2.0 * slope, 0.0);
  const double a0 = std::min(std::exp(c), acv[0]);
  const double r = std::sqrt(2.0 * a0);
  const double nsr2 = acv[0] / a0 - 1.0;
  const double sigma = r * std::sqrt(s);
  double lambda = alpha;
  if (nsr2 > 1e-6 && s > 0) lambda = s / (2.0 * nsr2);
  return {alpha, alpha, lambda, r, sigma};
}

double lorentz_pair_at(double r, double alpha, double omega, double b) {
  const double b2 = b * b;
  const double dm = 4.0 * (alpha - omega) * (alpha - omega) + b2;
  const double dp = 4.0 * (alpha + omega) * (alpha + omega) + b2;
  return 2.0 * r * r * b * (4.0 * (alpha * alpha + omega * omega) + b2) / (dm * dp);
}

HopfParams guess_psd(const std::vector<double>& w, const std::vector<double>& psd) {
  const std::size_t n = psd.size();
  std::vector<double> sm(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k >= 2 ? k - 2 : 0, b = std::min(n - 1, k + 2);
    double acc = 0;
    for (std::size_t j = a; j <= b; ++j) acc += psd[j];
    sm[k] = acc / static_cast<double>(b - a + 1);
  }
  const auto it = std::max_element(sm.begin(), sm.end());
  const auto kp = static_cast<std::size_t>(it - sm.begin());
  if (kp == 0 || kp + 1 >= n || !(w[kp] > 0) || !(*it > 0))
    throw GuessFailure("initial_guess: no interior spectral peak; supply initial parameters");
  const auto [alpha, peak] = parabolic_peak(w, psd, kp);
  const double half = 0.5 * std::max(peak, sm[kp]);

  double left = -1, right = -1;
  for (std::size_t k = kp; k-- > 0;) {
    if (sm[k] <= half) {
      left = w[k] + (half - sm[k]) / (sm[k + 1] - sm[k]) * (w[k + 1] - w[k]);
      break;
    }
  }
  for (std::size_t k = kp + 1; k < n; ++k) {
    if (sm[k] <= half) {
      right = w[k - 1] + (sm[k - 1] - half) / (sm[k - 1] - sm[k]) * (w[k] - w[k - 1]);
      break;
    }
  }
  double hw;
  if (left >= 0 && right >= 0) hw = 0.5 * (right - left);
  else if (right >= 0) hw = right - alpha;
  else if (left >= 0) hw = alpha - left;
  else throw GuessFailure("initial_guess: spectral peak has no half-maximum crossing");
  hw = std::max(hw, 0.5 * (w[kp + 1] - w[kp - 1]) * 0.25);
  const double s = 2.0 * hw;

  double integral = 0;
  for (std::size_t k = 1; k < n; ++k) integral += 0.5 * (psd[k] + psd[k - 1]) * (w[k] - w[k - 1]);
  const double acv0 = integral / std::numbers::pi;
  const double r = std::sqrt(2.0 * std::max(acv0, 1e-300));

  // lambda from the low-frequency background left by the main peak: scan a log grid.
  double lambda = alpha, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 240; ++i) {
    const double l = alpha * std::pow(10.0, -3.0 + 6.0 * i / 240.0);
    double err = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!(w[k] > 0) || w[k] > 0.5 * alpha) continue;
      const double model = lorentz_pair_at(r, alpha, w[k], s) +
                           s / (2.0 * l) * lorentz_pair_at(r, alpha, w[k], s + 2.0 * l);
      err += (psd[k] - model) * (psd[k] - model);
    }
    if (err < best) {
      best = err;
      lambda = l;
    }
  }
  return {alpha, alpha, lambda, r, r * std::sqrt(s)};
}

// Templates evaluated inline; equal to analysis::acv_formula / psd_formula.
double acv_template(const std::array<double, 4>& p, double u) {
  const double r = p[0], alpha = p[1], lambda = p[2], sigma = p[3];
  const double a = std::abs(u);
  const double s = (sigma / r) * (sigma / r);
  const double nsr2 = sigma * sigma / (2.0 * lambda * r * r);
  return 0.5 * r * r * (1.0 + nsr2 * std::exp(-lambda * a)) * std::cos(alpha * u) * std::exp(-0.5 * a * s);
}

double psd_template(const std::array<double, 4>& p, double w) {
  const double r = p[0], alpha = p[1], lambda = p[2], sigma = p[3];
  const double s = (sigma / r) * (sigma / r);
  const double nsr2 = sigma * sigma / (2.0 * lambda * r * r);
  return lorentz_pair_at(r, alpha, w, s) + nsr2 * lorentz_pair_at(r, alpha, w, s + 2.0 * lambda);
}

struct Objective {
  Target target;
  const std::vector<double>* grid;
  const std::vector<double>* values;
  std::size_t count;
  double scale;  ///< 1 / sum values^2
  std::array<double, 4> log_lo, log_hi;
  std::array<double, 4> lo_, hi_;

  double sse(const std::array<double, 4>& p) const {
    double acc = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const double t = target == Target::Acv ? acv_template(p, (*grid)[k]) : psd_template(p, (*grid)[k]);
      const double d = t - (*values)[k];
      acc += d * d;
    }
    return acc;
  }

  std::array<double, 4> clamp(const double* x, double& excess) const {
    std::array<double, 4> p{};
    excess = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double c = std::clamp(x[i], log_lo[i], log_hi[i]);
      excess += (x[i] - c) * (x[i] - c);
      p[i] = std::clamp(std::exp(c), lo_[i], hi_[i]);
    }
    return p;
  }

  double operator()(const double* x) const {
    double excess = 0;
    const auto p = clamp(x, excess);
    const double v = sse(p) * scale + 1e6 * excess;
    return std::isfinite(v) ? v : 1e300;
  }
};

double gsl_objective(const gsl_vector* x, void* params) {
  return (*static_cast<const Objective*>(params))(x->data);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

/// One Nelder-Mead run from x (updated in place). Returns true if the size test passed.
bool simplex(const Objective& obj, std::array<double, 4>& x, double& fx, double step) {
  gsl_multimin_function fn{&gsl_objective, 4, const_cast<Objective*>(&obj)};
  std::unique_ptr<gsl_vector, VectorDeleter> start(gsl_vector_alloc(4)), steps(gsl_vector_alloc(4));
  for (std::size_t i = 0; i < 4; ++i) {
    gsl_vector_set(start.get(), i, x[i]);
    gsl_vector_set(steps.get(), i, step);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4));
  gsl_multimin_fminimizer_set(m.get(), &fn, start.get(), steps.get());
  bool ok = false;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), kSizeTolerance) == GSL_SUCCESS) {
      ok = true;
      break;
    }
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  for (std::size_t i = 0; i < 4; ++i) x[i] = gsl_vector_get(best, i);
  fx = gsl_multimin_fminimizer_minimum(m.get());
  return ok;
}

}  // namespace

std::string to_string(Target t) { return t == Target::Acv ? "acv" : "psd"; }

Target parse_target(const std::string& s) {
  if (s == "acv") return Target::Acv;
  if (s == "psd") return Target::Psd;
  throw ConfigError("unknown fit target '" + s + "' (expected acv or psd)");
}

void Bounds::validate() const {
  for (std::size_t i = 0; i < 4; ++i)
    if (!(lower[i] > 0) || !(upper[i] > lower[i]) || !std::isfinite(upper[i]))
      throw ConfigError("fit bounds must satisfy 0 < lower < upper < inf");
}

FitProblem FitProblem::from(const analysis::AcvEstimate& acv) {
  FitProblem p;
  p.target = Target::Acv;
  p.grid = acv.lags;
  p.values = acv.values;
  return p;
}

FitProblem FitProblem::from(const analysis::PsdEstimate& psd) {
  FitProblem p;
  p.target = Target::Psd;
  p.grid = psd.omegas;
  p.values = psd.values;
  p.truncate_acv = false;
  return p;
}

void FitProblem::validate() const {
  if (grid.size() != values.size()) throw ConfigError("fit: grid and values differ in length");
  if (grid.size() < 16) throw ConfigError("fit: need at least 16 curve points");
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!std::isfinite(grid[k]) || !std::isfinite(values[k])) throw ConfigError("fit: non-finite curve value");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw ConfigError("fit: grid must be strictly increasing");
  if (bounds) bounds->validate();
  if (initial) initial->validate();
}

std::size_t acv_fit_range(const std::vector<double>& lags, const std::vector<double>& values) {
  if (values.empty() || !(values[0] > 0)) return values.size();
  const auto zc = zero_crossings(lags, values);
  std::vector<double> mag(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) mag[k] = std::abs(values[k]);
  for (std::size_t j = 0; j + 1 < zc.size(); ++j) {
    const std::size_t a = zc[j].after, b = zc[j + 1].after;
    const auto it = std::max_element(mag.begin() + static_cast<std::ptrdiff_t>(a),
                                     mag.begin() + static_cast<std::ptrdiff_t>(b));
    if (*it < 0.05 * values[0]) return a;
  }
  return values.size();
}

HopfParams initial_guess(const std::vector<double>& grid, const std::vector<double>& values,
                         Target target) {
  if (grid.size() != values.size()) throw ConfigError("initial_guess: grid and values differ in length");
  if (grid.size() < 16) throw ConfigError("initial_guess: need at least 16 curve points");
  return target == Target::Acv ? guess_acv(grid, values) : guess_psd(grid, values);
}

Derived derived_quantities(const HopfParams& p) {
  Derived d;
  const double acv0 = analysis::acv_formula(p, 0.0);
  d.sigma_sq_over_acv0 = p.sigma * p.sigma / acv0;
  d.focal_lyapunov = 0.5 * p.lambda;
  d.period = p.period();
  d.nsr = hopf::nsr(p);
  return d;
}

FitResult fit(const FitProblem& problem) {
  problem.validate();
  gsl_set_error_handler_off();
  std::size_t count = problem.grid.size();
  if (problem.target == Target::Acv && problem.truncate_acv)
    count = std::max<std::size_t>(std::min(count, acv_fit_range(problem.grid, problem.values)), 16);

  const HopfParams guess = problem.initial ? *problem.initial
                                           : initial_guess(problem.grid, problem.values, problem.target);

  const std::array<double, 4> raw{guess.r, guess.alpha, guess.lambda,
                                  std::max(guess.sigma, 1e-6 * guess.r)};
  Bounds bounds;
  if (problem.bounds) {
    bounds = *problem.bounds;
  } else {
    for (std::size_t i = 0; i < 4; ++i) {
      bounds.lower[i] = raw[i] / kDefaultRange;
      bounds.upper[i] = raw[i] * kDefaultRange;
    }
    bounds.validate();
  }

  Objective obj{problem.target, &problem.grid, &problem.values, count, 0.0, {}, {}, bounds.lower, bounds.upper};
  double norm2 = 0;
  for (std::size_t k = 0; k < count; ++k) norm2 += problem.values[k] * problem.values[k];
  obj.scale = norm2 > 0 ? 1.0 / norm2 : 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    obj.log_lo[i] = std::log(bounds.lower[i]);
    obj.log_hi[i] = std::log(bounds.upper[i]);
  }

  std::array<double, 4> x0{};
  for (std::size_t i = 0; i < 4; ++i)
    x0[i] = std::clamp(std::log(std::max(raw[i], bounds.lower[i])), obj.log_lo[i], obj.log_hi[i]);

  const NormalStream jitter(kJitterSeed);
  std::array<double, 4> best = x0;
  double best_f = obj(best.data());
  FitResult result;
  result.target = problem.target;
  result.n_points = count;
  for (std::size_t restart = 0; restart < kRestarts; ++restart) {
    std::array<double, 4> x = x0;
    if (restart > 0) {
      const auto a = jitter.block_normals(restart, 0);
      const auto b = jitter.block_normals(restart, 1);
      const double z[4] = {a[0], a[1], b[0], b[1]};
      for (std::size_t i = 0; i < 4; ++i) x[i] += kJitter * z[i];
    }
    double fx = obj(x.data());
    bool ok = false;
    for (std::size_t pass = 0; pass < kPolish; ++pass) {
      const double before = fx;
      ok = simplex(obj, x, fx, pass == 0 ? 0.1 : 1e-3);
      if (ok && before - fx <= 1e-15 * std::max(before, 1e-300)) break;
    }
    result.converged = result.converged || ok;
    if (fx < best_f) {
      best_f = fx;
      best = x;
    }
    result.restart_residuals.push_back(best_f / obj.scale);
  }

  double excess = 0;
  const auto p = obj.clamp(best.data(), excess);
  result.params = {p[1], p[1], p[2], p[0], p[3]};
  result.residual = obj.sse(p);
  result.derived = derived_quantities(result.params);
  if (!result.converged) throw FitConvergenceError("fit: simplex did not converge in any restart", result);
  return result;
}

}  // namespace nlc::fit
