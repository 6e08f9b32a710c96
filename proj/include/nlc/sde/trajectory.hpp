#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nlc {

/// Uniformly sampled multivariate time series, stored row-major.
struct Trajectory {
  double dt = 0.0;  ///< spacing between stored rows
  std::vector<std::string> channel_labels;
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t channels() const { return channel_labels.size(); }
  std::size_t rows() const { return channels() == 0 ? 0 : values.size() / channels(); }

  std::span<const double> row(std::size_t k) const {
    return {values.data() + k * channels(), channels()};
  }
  double at(std::size_t k, std::size_t c) const { return values[k * channels() + c]; }

  /// Copy of one channel as a contiguous series.
  std::vector<double> column(std::size_t c) const;
  std::vector<double> column(const std::string& label) const;
};

/// CSV with header `t,<label1>,...`, 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj);

}  // namespace nlc
