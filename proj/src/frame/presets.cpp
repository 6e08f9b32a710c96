#include "nlc/frame/presets.hpp"

#include "nlc/errors.hpp"

namespace nlc::frame {

SdeSystem van_der_pol(double mu) {
  if (!(mu > 0)) throw ConfigError("van_der_pol: mu must be positive");
  SdeSystem sys = SdeSystem::deterministic(2, [mu](std::span<const double> s, std::span<double> out) {
    out[0] = s[1];
    out[1] = mu * (1.0 - s[0] * s[0]) * s[1] - s[0];
  });
  sys.with_jacobian([mu](std::span<const double> s, Eigen::MatrixXd& jac) {
    jac.resize(2, 2);
    jac << 0.0, 1.0, -2.0 * mu * s[0] * s[1] - 1.0, mu * (1.0 - s[0] * s[0]);
  });
  return sys;
}

}  // namespace nlc::frame
