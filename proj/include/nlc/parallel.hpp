#pragma once

namespace nlc {

/// Caps the number of OpenMP threads used by the parallel kernels (0 = runtime default).
void set_max_threads(int n);
int max_threads();

}  // namespace nlc
