#include "nlc/analysis/estimates.hpp"

#include <ostream>

#include "nlc/io/csv.hpp"

namespace nlc::analysis {

namespace {

void write_pairs(std::ostream& os, const char* a, const char* b, const std::vector<double>& xs,
                 const std::vector<double>& ys) {
  io::CsvWriter out(os, {a, b});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double row[] = {xs[i], ys[i]};
    out.row(row);
  }
}

}  // namespace

void write_csv(std::ostream& os, const AcvEstimate& acv) {
  write_pairs(os, "lag", "acv", acv.lags, acv.values);
}
void write_csv(std::ostream& os, const PsdEstimate& psd) {
  write_pairs(os, "omega", "psd", psd.omegas, psd.values);
}
void write_csv(std::ostream& os, const DensityEstimate& kde) {
  write_pairs(os, "x", "density", kde.grid, kde.density);
}

}  // namespace nlc::analysis
