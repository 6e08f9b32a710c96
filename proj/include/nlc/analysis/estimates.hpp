#pragma once

#include <iosfwd>
#include <vector>

namespace nlc::analysis {

/// Autocovariance on a uniform lag grid.
struct AcvEstimate {
  std::vector<double> lags;
  std::vector<double> values;
  std::size_t size() const { return lags.size(); }
};

/// Two-sided spectral density PSD(w) = int ACV(u) e^{-iwu} du, reported for w >= 0.
/// Integrating over the whole real line gives 2 pi ACV(0); a one-sided density
/// normalised to the variance is PSD(w) / pi on w >= 0.
struct PsdEstimate {
  std::vector<double> omegas;
  std::vector<double> values;
  std::size_t size() const { return omegas.size(); }
};

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

void write_csv(std::ostream& os, const AcvEstimate& acv);      // lag,acv
void write_csv(std::ostream& os, const PsdEstimate& psd);      // omega,psd
void write_csv(std::ostream& os, const DensityEstimate& kde);  // x,density

}  // namespace nlc::analysis
