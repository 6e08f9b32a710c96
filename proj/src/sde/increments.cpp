#include "nlc/sde/increments.hpp"

#include "nlc/errors.hpp"

namespace nlc {

IncrementTable IncrementTable::sample(std::uint64_t seed, double dt, std::size_t channels,
                                      std::size_t steps) {
  IncrementTable table;
  table.dt = dt;
  table.channels = channels;
  table.dW.resize(steps * channels);
  table.dZ.resize(steps * channels);
  GaussianIncrements gen(seed, dt, channels);
  for (std::size_t i = 0; i < steps; ++i) {
    gen.draw(i, std::span(table.dW).subspan(i * channels, channels),
             std::span(table.dZ).subspan(i * channels, channels));
  }
  return table;
}

IncrementTable IncrementTable::coarsen(std::size_t factor) const {
  if (factor == 0 || steps() % factor != 0)
    throw ConfigError("IncrementTable::coarsen: factor must divide the step count");
  IncrementTable coarse;
  coarse.dt = dt * static_cast<double>(factor);
  coarse.channels = channels;
  const std::size_t n = steps() / factor;
  coarse.dW.assign(n * channels, 0.0);
  coarse.dZ.assign(n * channels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      double w = 0.0;  // W at the start of the fine substep, relative to the coarse start
      double z = 0.0;
      for (std::size_t k = 0; k < factor; ++k) {
        const std::size_t idx = (i * factor + k) * channels + c;
        z += dZ[idx] + dt * w;
        w += dW[idx];
      }
      coarse.dW[i * channels + c] = w;
      coarse.dZ[i * channels + c] = z;
    }
  }
  return coarse;
}

}  // namespace nlc
