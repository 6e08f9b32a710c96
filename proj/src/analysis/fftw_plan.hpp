#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <vector>

namespace nlc::analysis::detail {

/// Real-to-complex transform of a fixed length. Planning is serialized
/// (the FFTW planner is not thread-safe); execute() may run concurrently
/// on distinct buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(n / 2 + 1);
#pragma omp critical(nlc_fftw_planner)
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                 reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~RealFft() {
#pragma omp critical(nlc_fftw_planner)
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }

  /// `in` has n entries, `out` n/2+1. Plans are FFTW_UNALIGNED, so any buffers work.
  void execute(std::vector<double>& in, std::vector<std::complex<double>>& out) const {
    fftw_execute_dft_r2c(plan_, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  }

 private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

class InverseRealFft {
 public:
  explicit InverseRealFft(std::size_t n) : n_(n) {
    std::vector<std::complex<double>> in(n / 2 + 1);
    std::vector<double> out(n);
#pragma omp critical(nlc_fftw_planner)
    plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                 out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~InverseRealFft() {
#pragma omp critical(nlc_fftw_planner)
    fftw_destroy_plan(plan_);
  }
  InverseRealFft(const InverseRealFft&) = delete;
  InverseRealFft& operator=(const InverseRealFft&) = delete;

  void execute(std::vector<std::complex<double>>& in, std::vector<double>& out) const {
    fftw_execute_dft_c2r(plan_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

 private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

}  // namespace nlc::analysis::detail
