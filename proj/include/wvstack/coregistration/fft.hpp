#pragma once

#include <complex>
#include <cstddef>
#include <mutex>

#include <fftw3.h>

#include "wvstack/core/error.hpp"

namespace wvstack {

namespace detail {
/// FFTW's planner is not reentrant; every plan create/destroy goes through this.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// In-place 2-D complex transform of a row-major rows x cols buffer.
/// Plans use FFTW_ESTIMATE so results never depend on timing.
class Fft2D {
 public:
  Fft2D(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    buffer_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * rows * cols));
    if (!buffer_) throw Error(Errc::Io, "fftw_malloc failed");
    auto* p = reinterpret_cast<fftw_complex*>(buffer_);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_2d(int(rows), int(cols), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_2d(int(rows), int(cols), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft2D() {
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(inverse_);
    }
    fftw_free(buffer_);
  }
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  std::complex<double>* data() { return buffer_; }
  std::complex<double>& operator()(std::size_t r, std::size_t c) { return buffer_[r * cols_ + c]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }

  void forward() { fftw_execute(forward_); }
  /// Unnormalised: a forward/inverse round trip scales by rows * cols.
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t rows_, cols_;
  std::complex<double>* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace wvstack
