#pragma once

// Internal FFTW wrappers. Planning goes through a global mutex (the FFTW
// planner is not thread-safe); execution on a plan's own buffer is.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>

namespace fmkdv {

std::mutex& fftw_planner_mutex();

// In-place complex transform of length n on an owned, aligned buffer.
class ComplexPlan {
 public:
  explicit ComplexPlan(std::size_t n);
  ~ComplexPlan();
  ComplexPlan(const ComplexPlan&) = delete;
  ComplexPlan& operator=(const ComplexPlan&) = delete;

  std::complex<double>* data() { return buffer_; }
  std::size_t size() const { return n_; }
  void forward();
  void backward();  // unnormalized

 private:
  std::size_t n_;
  std::complex<double>* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

// One cached plan per (thread, size).
ComplexPlan& complex_plan(std::size_t n);

// Real-to-half-complex pair of length n on owned buffers (n reals, n/2+1 complex).
class RealPlan {
 public:
  explicit RealPlan(std::size_t n) : n_(n) {
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    half_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(fftw_planner_mutex());
    auto* h = reinterpret_cast<fftw_complex*>(half_);
    r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, h, FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), h, real_, FFTW_ESTIMATE);
  }
  ~RealPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
    fftw_free(real_);
    fftw_free(half_);
  }
  RealPlan(const RealPlan&) = delete;
  RealPlan& operator=(const RealPlan&) = delete;

  double* real() { return real_; }
  std::complex<double>* half() { return half_; }
  std::size_t size() const { return n_; }
  void forward() { fftw_execute(r2c_); }
  // c2r destroys its input; callers refill half() before each use.
  void backward() { fftw_execute(c2r_); }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  std::complex<double>* half_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace fmkdv
