#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nlc/sde/philox.hpp"

namespace nlc {

/// Per-step stochastic increments of m independent Wiener channels:
/// dW_j = W_j(t+dt) - W_j(t) and the area term dZ_j = int_t^{t+dt} (W_j(s) - W_j(t)) ds.
///
/// Channel j uses normal slots 2j and 2j+1:
///   dW = U1 sqrt(dt),  dZ = dt^{3/2} (U1 + U2/sqrt(3)) / 2,
/// which gives Var dZ = dt^3/3 and Cov(dW, dZ) = dt^2/2.
/// Slots from 2m on are "extra" normals available to model-specific code.
class GaussianIncrements {
 public:
  GaussianIncrements(std::uint64_t seed, double dt, std::size_t channels, std::size_t extra = 0)
      : stream_(seed),
        dt_(dt),
        sqrt_dt_(std::sqrt(dt)),
        half_dt32_(0.5 * dt * std::sqrt(dt)),
        channels_(channels),
        normals_(2 * channels + extra) {}

  /// Draws step `step`; dW and dZ must have `channels()` entries.
  void draw(std::uint64_t step, std::span<double> dW, std::span<double> dZ) {
    stream_.fill(step, normals_);
    constexpr double inv_sqrt3 = 0.57735026918962576451;
    for (std::size_t j = 0; j < channels_; ++j) {
      const double u1 = normals_[2 * j];
      const double u2 = normals_[2 * j + 1];
      dW[j] = u1 * sqrt_dt_;
      dZ[j] = half_dt32_ * (u1 + u2 * inv_sqrt3);
    }
  }

  /// Extra normals of the most recent draw.
  double extra(std::size_t k) const { return normals_[2 * channels_ + k]; }
  /// The raw normal pair behind channel j of the most recent draw.
  double raw(std::size_t slot) const { return normals_[slot]; }

  double dt() const { return dt_; }
  std::size_t channels() const { return channels_; }

 private:
  NormalStream stream_;
  double dt_;
  double sqrt_dt_;
  double half_dt32_;
  std::size_t channels_;
  std::vector<double> normals_;
};

/// Increments of an m-channel Wiener path on a uniform fine grid, stored
/// row-major (step x channel). Used to drive several step sizes with one path.
struct IncrementTable {
  double dt = 0.0;
  std::size_t channels = 0;
  std::vector<double> dW;
  std::vector<double> dZ;

  std::size_t steps() const { return channels == 0 ? 0 : dW.size() / channels; }

  /// Draws `steps` rows from a GaussianIncrements stream.
  static IncrementTable sample(std::uint64_t seed, double dt, std::size_t channels,
                               std::size_t steps);

  /// Aggregates `factor` consecutive fine steps into one coarse step:
  /// dW adds, and dZ = sum_k [dZ_k + h (W_k - W_0)] over the fine substeps.
  IncrementTable coarsen(std::size_t factor) const;
};

}  // namespace nlc
