#pragma once

#include "nlc/sde/system.hpp"

namespace nlc::frame {

/// x' = y, y' = mu (1 - x^2) y - x, with analytic Jacobian.
SdeSystem van_der_pol(double mu);

}  // namespace nlc::frame
