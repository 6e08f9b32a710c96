#include "nlc/cli/cli.hpp"

#include <dlfcn.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "nlc/analysis/acv.hpp"
#include "nlc/analysis/density.hpp"
#include "nlc/analysis/periodogram.hpp"
#include "nlc/analysis/templates.hpp"
#include "nlc/cli/plugin.h"
#include "nlc/errors.hpp"
#include "nlc/fit/fit.hpp"
#include "nlc/frame/comoving.hpp"
#include "nlc/frame/cycle.hpp"
#include "nlc/frame/presets.hpp"
#include "nlc/frame/reduced.hpp"
#include "nlc/hopf/hopf.hpp"
#include "nlc/io/csv.hpp"
#include "nlc/parallel.hpp"
#include "nlc/validation/acceptance.hpp"

namespace nlc::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Reads `{"threads": 2, "simulate": {"nsr": 0.1}}`: nested objects address subcommands.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_string()) return v.get<std::string>();
    throw CLI::ConversionError("config key '" + key + "' must be a number, string or boolean");
  }

  static void collect(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        collect(*it, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it->is_array()) {
        for (const auto& v : *it) item.inputs.push_back(scalar(v, it.key()));
      } else {
        item.inputs.push_back(scalar(*it, it.key()));
      }
      items.push_back(std::move(item));
    }
  }
};

struct HopfArgs {
  double r = 1.0;
  double alpha = 2 * std::numbers::pi;
  std::optional<double> alpha0;
  double lambda = 2 * std::numbers::pi;
  std::optional<double> sigma;
  std::optional<double> nsr;

  hopf::HopfParams params() const {
    hopf::HopfParams p{alpha, alpha0.value_or(alpha), lambda, r, sigma.value_or(0.0)};
    if (nsr) {
      if (*nsr < 0) throw ConfigError("--nsr must be >= 0");
      p.sigma = std::sqrt(hopf::sigma_for_nsr(lambda, r, *nsr));
    }
    p.validate();
    return p;
  }
};

void add_hopf_options(CLI::App* app, HopfArgs& h) {
  app->add_option("--r", h.r, "cycle radius")->capture_default_str();
  app->add_option("--alpha", h.alpha, "angular frequency on the cycle")->capture_default_str();
  app->add_option("--alpha0", h.alpha0, "angular frequency near the focus (default: alpha)");
  app->add_option("--lambda", h.lambda, "magnitude of the cycle's Lyapunov exponent")
      ->capture_default_str();
  auto* sigma = app->add_option("--sigma", h.sigma, "noise intensity (default 0)");
  auto* nsr = app->add_option("--nsr", h.nsr, "noise-to-signal ratio; sets sigma^2 = 2 lambda r^2 nsr^2");
  nsr->excludes(sigma);
}

template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(out);
    out.flush();
  } else {
    io::write_atomically(path, fn);
  }
}

std::string numbered(const std::string& path, std::size_t k) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(k) + p.extension().string()))
      .string();
}

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(kSeedEnv) + " must be an unsigned integer, got '" + env + "'");
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  HopfArgs hopf;
  std::string model = "hopf-exact";
  std::string scheme = "rk15";
  std::optional<double> dt;
  std::optional<double> periods;
  std::optional<std::size_t> steps;
  std::size_t record_every = 10;
  std::optional<double> burn_in;
  std::size_t paths = 1;
  std::uint64_t seed = 1;
  bool regularize = false;
  std::string output = "-";
};

void write_reduced(std::ostream& os, const frame::ReducedPath& path, const Trajectory& state) {
  const auto d = static_cast<std::size_t>(path.z.cols());
  std::vector<std::string> header{"t", "tau"};
  for (std::size_t i = 0; i < d; ++i) header.push_back("z" + std::to_string(i));
  header.insert(header.end(), state.channel_labels.begin(), state.channel_labels.end());
  io::CsvWriter w(os, header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < path.rows(); ++k) {
    row[0] = static_cast<double>(k) * path.dt;
    row[1] = path.tau[k];
    for (std::size_t i = 0; i < d; ++i)
      row[2 + i] = path.z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    const auto s = state.row(k);
    std::copy(s.begin(), s.end(), row.begin() + 2 + static_cast<std::ptrdiff_t>(d));
    w.row(row);
  }
}

int simulate(const SimulateArgs& a, std::ostream& out) {
  const auto p = a.hopf.params();
  IntegratorConfig cfg;
  cfg.dt = a.dt.value_or(1e-3 * p.period());
  if (!(cfg.dt > 0)) throw ConfigError("--dt must be positive");
  if (a.steps) {
    cfg.n_steps = *a.steps;
  } else {
    const double periods = a.periods.value_or(100.0);
    if (!(periods > 0)) throw ConfigError("--periods must be positive");
    cfg.n_steps = static_cast<std::size_t>(std::llround(periods * p.period() / cfg.dt));
  }
  cfg.record_every = a.record_every;
  const double burn = a.burn_in.value_or(10.0 / p.lambda);
  if (!(burn >= 0)) throw ConfigError("--burn-in must be >= 0");
  cfg.burn_in = static_cast<std::size_t>(std::ceil(burn / cfg.dt));
  cfg.scheme = a.scheme == "em" ? Scheme::EulerMaruyama : Scheme::StrongRK15;
  cfg.seed = a.seed;
  cfg.validate();
  if (a.paths > 1 && (a.output.empty() || a.output == "-"))
    throw ConfigError("--paths > 1 needs --output; path k is written to <stem>_k<ext>");

  const auto target = [&](std::size_t k) { return a.paths > 1 ? numbered(a.output, k) : a.output; };

  if (a.model == "hopf-exact") {
    const auto paths = hopf::simulate_hopf_exact_ensemble(p, cfg, a.paths);
    for (std::size_t k = 0; k < paths.size(); ++k)
      emit(target(k), out, [&](std::ostream& os) { write_csv(os, paths[k]); });
  } else if (a.model == "hopf-linear" || a.model == "hopf-leading") {
    hopf::LinearModelOptions lo;
    lo.leading_order = a.model == "hopf-leading";
    lo.regularize_singularity = a.regularize;
    const auto paths = hopf::simulate_hopf_linear_ensemble(p, cfg, a.paths, lo);
    for (std::size_t k = 0; k < paths.size(); ++k)
      emit(target(k), out, [&](std::ostream& os) { hopf::write_csv(os, paths[k]); });
  } else {
    const auto ode = hopf::hopf_system(p);
    const auto cycle = frame::find_limit_cycle(ode, Eigen::VectorXd::Unit(2, 0) * p.r);
    const auto fr = frame::build_frame(ode, cycle);
    const auto model = frame::reduce(cycle, fr, p.sigma);
    const auto paths = frame::simulate_reduced_ensemble(model, cfg, a.paths);
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const auto state = frame::reconstruct(cycle, fr, paths[k]);
      emit(target(k), out, [&](std::ostream& os) { write_reduced(os, paths[k], state); });
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- decompose

class Plugin {
 public:
  explicit Plugin(const std::string& path) : handle_(dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL)) {
    if (!handle_) throw ConfigError("cannot load plugin '" + path + "': " + dlerror());
    dim_fn_ = reinterpret_cast<nlc_ode_dim_fn>(dlsym(handle_, "nlc_ode_dim"));
    drift_fn_ = reinterpret_cast<nlc_ode_drift_fn>(dlsym(handle_, "nlc_ode_drift"));
    if (!dim_fn_ || !drift_fn_)
      throw ConfigError("plugin '" + path + "' lacks nlc_ode_dim or nlc_ode_drift");
    jac_fn_ = reinterpret_cast<nlc_ode_jacobian_fn>(dlsym(handle_, "nlc_ode_jacobian"));
    initial_fn_ = reinterpret_cast<nlc_ode_initial_fn>(dlsym(handle_, "nlc_ode_initial"));
    configure_fn_ = reinterpret_cast<nlc_ode_configure_fn>(dlsym(handle_, "nlc_ode_configure"));
  }
  ~Plugin() { dlclose(handle_); }
  Plugin(const Plugin&) = delete;
  Plugin& operator=(const Plugin&) = delete;

  void configure(const std::vector<double>& params) const {
    if (params.empty()) return;
    if (!configure_fn_) throw ConfigError("plugin takes no parameters (no nlc_ode_configure)");
    configure_fn_(params.data(), static_cast<int>(params.size()));
  }

  SdeSystem system() const {
    const int n = dim_fn_();
    if (n < 2) throw ConfigError("plugin dimension must be >= 2, got " + std::to_string(n));
    const auto dim = static_cast<std::size_t>(n);
    auto drift = drift_fn_;
    auto sys = SdeSystem::deterministic(
        dim, [drift](std::span<const double> x, std::span<double> f) { drift(x.data(), f.data()); });
    if (jac_fn_) {
      auto jac = jac_fn_;
      sys.with_jacobian([jac, n](std::span<const double> x, Eigen::MatrixXd& out) {
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n, n);
        jac(x.data(), m.data());
        out = m;
      });
    }
    return sys;
  }

  std::optional<Eigen::VectorXd> initial(std::size_t dim) const {
    if (!initial_fn_) return std::nullopt;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    initial_fn_(x.data());
    return x;
  }

 private:
  void* handle_;
  nlc_ode_dim_fn dim_fn_ = nullptr;
  nlc_ode_drift_fn drift_fn_ = nullptr;
  nlc_ode_jacobian_fn jac_fn_ = nullptr;
  nlc_ode_initial_fn initial_fn_ = nullptr;
  nlc_ode_configure_fn configure_fn_ = nullptr;
};

struct DecomposeArgs {
  HopfArgs hopf;
  std::string preset = "vdp";
  double mu = 1.0;
  std::string plugin;
  std::vector<double> plugin_params;
  std::vector<double> guess;
  std::size_t grid = 1024;
  double tol = 1e-8;
  std::string cycle_out;
  std::string frame_out;
  std::string j0_out;
  std::string output = "-";
};

int decompose(const DecomposeArgs& a, std::ostream& out) {
  std::unique_ptr<Plugin> plugin;
  std::optional<SdeSystem> ode;
  Eigen::VectorXd guess;
  if (!a.plugin.empty()) {
    plugin = std::make_unique<Plugin>(a.plugin);
    plugin->configure(a.plugin_params);
    ode = plugin->system();
    guess = plugin->initial(ode->dim()).value_or(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(ode->dim()), 0));
  } else if (a.preset == "vdp") {
    ode = frame::van_der_pol(a.mu);
    guess = 2.0 * Eigen::VectorXd::Unit(2, 0);
  } else {
    const auto p = a.hopf.params();
    ode = hopf::hopf_system(p);
    guess = p.r * Eigen::VectorXd::Unit(2, 0);
  }
  if (!a.guess.empty()) {
    if (a.guess.size() != ode->dim())
      throw ConfigError("--guess needs " + std::to_string(ode->dim()) + " values");
    guess = Eigen::Map<const Eigen::VectorXd>(a.guess.data(), static_cast<Eigen::Index>(a.guess.size()));
  }

  frame::CycleOptions copt;
  copt.grid_points = a.grid;
  copt.tol = a.tol;
  const auto cycle = frame::find_limit_cycle(*ode, guess, copt);
  const auto fr = frame::build_frame(*ode, cycle);
  const auto model = frame::reduce(cycle, fr, 0.0);
  const auto res = frame::frame_residuals(cycle, fr);

  if (!a.cycle_out.empty()) emit(a.cycle_out, out, [&](std::ostream& os) { frame::write_csv(os, cycle); });
  if (!a.frame_out.empty()) emit(a.frame_out, out, [&](std::ostream& os) { frame::write_csv(os, fr); });
  if (!a.j0_out.empty()) {
    emit(a.j0_out, out, [&](std::ostream& os) {
      const auto d = model.deviation_dim();
      std::vector<std::string> header{"t"};
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          header.push_back("J0_" + std::to_string(i) + "_" + std::to_string(j));
      io::CsvWriter w(os, header);
      std::vector<double> row(header.size());
      for (std::size_t k = 0; k < cycle.points(); ++k) {
        row[0] = cycle.grid[k];
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j)
            row[1 + i * d + j] = model.J0[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        w.row(row);
      }
    });
  }

  json summary = {{"period", cycle.period},
                  {"dim", cycle.dim()},
                  {"grid_points", cycle.points()},
                  {"closure_error", cycle.closure_error},
                  {"monodromy_radius", model.monodromy_radius},
                  {"stable", model.stable()},
                  {"warning", model.warning},
                  {"frame",
                   {{"orthogonality", res.orthogonality},
                    {"tangent_transport", res.tangent_transport},
                    {"rate_identity", res.rate_identity}}}};
  emit(a.output, out, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct SeriesArgs {
  std::string input;
  std::string column;
  std::optional<double> dt;
};

struct Series {
  std::vector<double> values;
  double dt;
};

Series load_series(const SeriesArgs& a) {
  const auto table = io::read_csv(fs::path(a.input));
  std::string column = a.column;
  if (column.empty())
    column = table.header.size() > 1 && table.header[0] == "t" ? table.header[1] : table.header[0];
  Series s{table.column(column), 0.0};
  if (a.dt) {
    s.dt = *a.dt;
  } else if (table.has("t") && table.rows() >= 2) {
    s.dt = table.column("t")[1] - table.column("t")[0];
  } else {
    throw ConfigError("--dt is required when the input has no 't' column");
  }
  if (!(s.dt > 0)) throw ConfigError("sampling interval must be positive");
  return s;
}

struct AnalyzeArgs {
  SeriesArgs series;
  std::string method;
  std::optional<double> max_lag;
  std::string acv_method = "auto";
  std::size_t segments = 1;
  std::string window = "none";
  std::size_t points = 512;
  std::string output = "-";
};

int analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto s = load_series(a.series);
  const auto n = s.values.size();
  if (a.method == "acv") {
    const double max_lag = a.max_lag.value_or(0.1 * static_cast<double>(n) * s.dt);
    const auto m = a.acv_method == "direct" ? analysis::AcvMethod::Direct
                   : a.acv_method == "fft"  ? analysis::AcvMethod::Fft
                                            : analysis::AcvMethod::Auto;
    const auto acv = analysis::sample_acv(s.values, s.dt, max_lag, m);
    emit(a.output, out, [&](std::ostream& os) { analysis::write_csv(os, acv); });
  } else if (a.method == "psd") {
    if (a.segments < 1 || a.segments > n / 2)
      throw ConfigError("--segments must be between 1 and half the series length");
    const std::size_t len = n / a.segments;
    std::vector<std::vector<double>> pieces;
    for (std::size_t k = 0; k < a.segments; ++k)
      pieces.emplace_back(s.values.begin() + static_cast<std::ptrdiff_t>(k * len),
                          s.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * len));
    const auto w = a.window == "hann" ? analysis::Window::Hann : analysis::Window::None;
    const auto psd = analysis::averaged_periodogram(pieces, s.dt, w);
    emit(a.output, out, [&](std::ostream& os) { analysis::write_csv(os, psd); });
  } else if (a.method == "kde") {
    const auto d = analysis::kde(s.values, a.points);
    emit(a.output, out, [&](std::ostream& os) { analysis::write_csv(os, d); });
  } else {
    const json j = {{"kurtosis", analysis::kurtosis(s.values)},
                    {"mean", analysis::mean(s.values)},
                    {"variance", analysis::variance(s.values)},
                    {"n", n}};
    emit(a.output, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
  return kExitOk;
}

// ---------------------------------------------------------------- formula

struct FormulaArgs {
  HopfArgs hopf;
  std::string templ;
  std::optional<double> umax;
  std::optional<double> omega_max;
  std::size_t points = 1001;
  std::string output = "-";
};

int formula(const FormulaArgs& a, std::ostream& out) {
  const auto p = a.hopf.params();
  if (a.points < 2) throw ConfigError("--points must be >= 2");
  const double span = a.templ == "acv" ? a.umax.value_or(5 * p.period()) : a.omega_max.value_or(4 * p.alpha);
  if (!(span > 0)) throw ConfigError("grid extent must be positive");
  const auto grid = analysis::uniform_grid(span / static_cast<double>(a.points - 1), a.points);
  if (a.templ == "acv") {
    const auto c = analysis::acv_curve(p, grid);
    emit(a.output, out, [&](std::ostream& os) { analysis::write_csv(os, c); });
  } else {
    const auto c = analysis::psd_curve(p, grid);
    emit(a.output, out, [&](std::ostream& os) { analysis::write_csv(os, c); });
  }
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string target;
  std::string input;
  std::string grid_column;
  std::string column;
  std::vector<double> initial;
  std::vector<double> lower;
  std::vector<double> upper;
  bool no_truncate = false;
  std::string output = "-";
};

json to_json(const fit::FitResult& r) {
  return {{"params",
           {{"r", r.params.r}, {"alpha", r.params.alpha}, {"lambda", r.params.lambda}, {"sigma", r.params.sigma}}},
          {"residual", r.residual},
          {"derived",
           {{"sigma_sq_over_acv0", r.derived.sigma_sq_over_acv0},
            {"focal_lyapunov", r.derived.focal_lyapunov},
            {"period", r.derived.period},
            {"nsr", r.derived.nsr}}},
          {"target", fit::to_string(r.target)},
          {"n_points", r.n_points},
          {"converged", r.converged},
          {"restart_residuals", r.restart_residuals}};
}

int run_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto table = io::read_csv(fs::path(a.input));
  if (table.header.size() < 2 && (a.grid_column.empty() || a.column.empty()))
    throw ConfigError(a.input + ": need a grid column and a value column");
  const auto& grid = table.column(a.grid_column.empty() ? table.header[0] : a.grid_column);
  const auto& values = table.column(a.column.empty() ? table.header[1] : a.column);

  fit::FitProblem problem;
  problem.target = fit::parse_target(a.target);
  problem.grid = grid;
  problem.values = values;
  problem.truncate_acv = !a.no_truncate;
  if (!a.initial.empty())
    problem.initial = hopf::HopfParams{a.initial[1], a.initial[1], a.initial[2], a.initial[0], a.initial[3]};
  if (!a.lower.empty() || !a.upper.empty()) {
    fit::Bounds b;
    std::copy(a.lower.begin(), a.lower.end(), b.lower.begin());
    std::copy(a.upper.begin(), a.upper.end(), b.upper.begin());
    problem.bounds = b;
  }
  try {
    const auto result = fit::fit(problem);
    emit(a.output, out, [&](std::ostream& os) { os << to_json(result).dump(2) << '\n'; });
    return kExitOk;
  } catch (const fit::FitConvergenceError& e) {
    emit(a.output, out, [&](std::ostream& os) { os << to_json(e.best()).dump(2) << '\n'; });
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string nino;
  std::string nino_column;
  std::vector<int> criteria;
  std::uint64_t seed = 1;
};

int validate(const ValidateArgs& a, std::ostream& out) {
  validation::SuiteOptions opt;
  std::string nino = a.nino;
  if (nino.empty())
    if (const char* env = std::getenv("NLC_NINO34"); env && *env) nino = env;
  if (!nino.empty()) opt.nino_series = nino;
  opt.nino_column = a.nino_column;
  opt.only = a.criteria;
  opt.seed = a.seed;
  const auto results =
      validation::run_suite(opt, [&](const validation::CriterionResult& r) { validation::print_result(out, r); });
  out << "\n  #  status  criterion\n";
  for (const auto& r : results) {
    std::ostringstream line;
    line << (r.id < 10 ? "  " : " ") << r.id << "  " << validation::to_string(r.status) << "    " << r.name;
    out << line.str() << '\n';
  }
  return validation::all_passed(results) ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy limit cycles: simulation, decomposition, estimation and fitting", "nlc"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; the command line wins");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  app.add_option("--threads", threads, "cap on OpenMP threads (0: runtime default)")
      ->check(CLI::NonNegativeNumber);

  std::uint64_t seed = 1;
  try {
    seed = default_seed();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  SimulateArgs sim;
  sim.seed = seed;
  auto* s = app.add_subcommand("simulate", "simulate sample paths to CSV");
  s->add_option("--model", sim.model, "hopf-exact | hopf-linear | hopf-leading | reduced")
      ->check(CLI::IsMember({"hopf-exact", "hopf-linear", "hopf-leading", "reduced"}))
      ->capture_default_str();
  add_hopf_options(s, sim.hopf);
  s->add_option("--scheme", sim.scheme, "rk15 | em (hopf-exact)")
      ->check(CLI::IsMember({"rk15", "em"}))
      ->capture_default_str();
  s->add_option("--dt", sim.dt, "time step (default: period / 1000)");
  auto* periods = s->add_option("--periods", sim.periods, "simulated length in cycle periods (default 100)");
  s->add_option("--steps", sim.steps, "simulated length in steps")->excludes(periods);
  s->add_option("--record-every", sim.record_every, "store every k-th step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--burn-in", sim.burn_in, "discarded initial time (default: 10 / lambda)");
  s->add_option("--paths", sim.paths, "number of independent paths")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--seed", sim.seed, std::string("random seed (default: $") + kSeedEnv + " or 1)");
  s->add_flag("--regularize", sim.regularize, "floor |r + z| in the linear model instead of failing");
  s->add_option("-o,--output", sim.output, "output CSV ('-' for stdout)")->capture_default_str();

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "find a limit cycle, its comoving frame and reduced dynamics");
  d->add_option("--preset", dec.preset, "vdp | hopf")->check(CLI::IsMember({"vdp", "hopf"}))->capture_default_str();
  d->add_option("--mu", dec.mu, "van der Pol damping")->capture_default_str();
  add_hopf_options(d, dec.hopf);
  d->add_option("--plugin", dec.plugin, "shared library implementing the nlc_ode_* interface")
      ->check(CLI::ExistingFile);
  d->add_option("--plugin-param", dec.plugin_params, "values passed to nlc_ode_configure")->delimiter(',');
  d->add_option("--guess", dec.guess, "starting state for the cycle search")->delimiter(',');
  d->add_option("--grid", dec.grid, "samples per period")->check(CLI::Range(8, 1 << 22))->capture_default_str();
  d->add_option("--tol", dec.tol, "return-map convergence tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--cycle-out", dec.cycle_out, "cycle CSV (t, L*, T*, speed, kappa)");
  d->add_option("--frame-out", dec.frame_out, "frame CSV (t, U_i_j)");
  d->add_option("--j0-out", dec.j0_out, "reduced Jacobian CSV (t, J0_i_j)");
  d->add_option("-o,--output", dec.output, "summary JSON ('-' for stdout)")->capture_default_str();

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "estimate ACV, PSD, density or kurtosis of a CSV column");
  a->add_option("--method", an.method, "acv | psd | kde | kurtosis")
      ->required()
      ->check(CLI::IsMember({"acv", "psd", "kde", "kurtosis"}));
  a->add_option("-i,--input", an.series.input, "input CSV")->required()->check(CLI::ExistingFile);
  a->add_option("--column", an.series.column, "column name (default: the first non-'t' column)");
  a->add_option("--dt", an.series.dt, "sampling interval (default: spacing of column 't')");
  a->add_option("--max-lag", an.max_lag, "largest ACV lag (default: a tenth of the record)");
  a->add_option("--acv-method", an.acv_method, "auto | direct | fft")
      ->check(CLI::IsMember({"auto", "direct", "fft"}))
      ->capture_default_str();
  a->add_option("--segments", an.segments, "PSD: average over this many equal segments")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  a->add_option("--window", an.window, "PSD taper: none | hann")
      ->check(CLI::IsMember({"none", "hann"}))
      ->capture_default_str();
  a->add_option("--points", an.points, "KDE grid points")->check(CLI::Range(2, 1 << 24))->capture_default_str();
  a->add_option("-o,--output", an.output, "output file ('-' for stdout)")->capture_default_str();

  FormulaArgs fo;
  auto* f = app.add_subcommand("formula", "evaluate the ACV or PSD template on a grid");
  f->add_option("--template", fo.templ, "acv | psd")->required()->check(CLI::IsMember({"acv", "psd"}));
  add_hopf_options(f, fo.hopf);
  f->add_option("--umax", fo.umax, "largest lag (acv, default 5 periods)");
  f->add_option("--omega-max", fo.omega_max, "largest angular frequency (psd, default 4 alpha)");
  f->add_option("--points", fo.points, "grid points")->check(CLI::Range(2, 1 << 24))->capture_default_str();
  f->add_option("-o,--output", fo.output, "output CSV ('-' for stdout)")->capture_default_str();

  FitArgs fi;
  auto* t = app.add_subcommand("fit", "least-squares fit of a template to an ACV or PSD curve");
  t->add_option("--target", fi.target, "acv | psd")->required()->check(CLI::IsMember({"acv", "psd"}));
  t->add_option("-i,--input", fi.input, "curve CSV (grid, value)")->required()->check(CLI::ExistingFile);
  t->add_option("--grid-column", fi.grid_column, "grid column (default: first)");
  t->add_option("--column", fi.column, "value column (default: second)");
  t->add_option("--initial", fi.initial, "starting point r,alpha,lambda,sigma")->expected(4)->delimiter(',');
  t->add_option("--lower", fi.lower, "lower bounds r,alpha,lambda,sigma")->expected(4)->delimiter(',');
  t->add_option("--upper", fi.upper, "upper bounds r,alpha,lambda,sigma")->expected(4)->delimiter(',');
  t->add_flag("--no-truncate", fi.no_truncate, "fit all ACV lags");
  t->add_option("-o,--output", fi.output, "result JSON ('-' for stdout)")->capture_default_str();

  ValidateArgs va;
  va.seed = seed;
  auto* v = app.add_subcommand("validate", "run the acceptance suite and print a pass/fail table");
  v->add_option("--nino34", va.nino, "monthly N3.4 anomaly CSV (default: $NLC_NINO34)");
  v->add_option("--nino-column", va.nino_column, "anomaly column (default: 'anomaly' or the last)");
  v->add_option("--criteria", va.criteria, "run only these criteria")->delimiter(',')->check(CLI::Range(1, validation::kCriterionCount));
  v->add_option("--seed", va.seed, "base seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ConfigError& e) {
    std::string msg = e.what();
    const std::string ini = "INI was not able to parse ";
    if (msg.rfind(ini, 0) == 0) msg = "unknown config key '" + msg.substr(ini.size()) + "'";
    err << "error: " << msg << '\n';
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    set_max_threads(threads);
    if (s->parsed()) return simulate(sim, out);
    if (d->parsed()) return decompose(dec, out);
    if (a->parsed()) return analyze(an, out);
    if (f->parsed()) return formula(fo, out);
    if (t->parsed()) return run_fit(fi, out, err);
    return validate(va, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nlc::cli
