#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlc/sde/increments.hpp"
#include "nlc/sde/system.hpp"
#include "nlc/sde/trajectory.hpp"

namespace nlc {

enum class Scheme { EulerMaruyama, StrongRK15 };

/// Components larger than this in magnitude abort the path.
inline constexpr double kDivergenceBound = 1e6;

struct IntegratorConfig {
  double dt = 1e-4;
  std::size_t n_steps = 1;  ///< recorded steps (after burn-in)
  Scheme scheme = Scheme::StrongRK15;
  std::uint64_t seed = 0;
  std::vector<double> initial_state;
  std::size_t record_every = 1;  ///< store every k-th state
  std::size_t burn_in = 0;       ///< steps integrated before the first stored row

  /// Throws ConfigError unless dt > 0, n_steps >= 1, record_every >= 1.
  void validate() const;
  std::size_t total_steps() const { return burn_in + n_steps; }
  std::size_t stored_rows() const { return n_steps / record_every + 1; }
};

/// One sample path. Bit-identical for identical (system, config).
Trajectory integrate_path(const SdeSystem& system, const IntegratorConfig& config);

/// Path driven by pre-drawn increments (row i of `increments` drives step i).
/// `increments.dt` is the step size; config.dt and config.seed are ignored.
Trajectory integrate_path(const SdeSystem& system, const IntegratorConfig& config,
                          const IncrementTable& increments);

/// n_paths paths; path k is integrate_path with seed derive_subseed(config.seed, k).
/// Paths are integrated in parallel (OpenMP); output order is by k.
std::vector<Trajectory> integrate_ensemble(const SdeSystem& system, const IntegratorConfig& config,
                                           std::size_t n_paths);

namespace serial {
/// Same contract as nlc::integrate_ensemble, single-threaded.
std::vector<Trajectory> integrate_ensemble(const SdeSystem& system, const IntegratorConfig& config,
                                           std::size_t n_paths);
}  // namespace serial

}  // namespace nlc
