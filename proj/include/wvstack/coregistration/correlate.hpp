#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "wvstack/coregistration/fft.hpp"
#include "wvstack/core/error.hpp"
#include "wvstack/core/raster.hpp"

namespace wvstack {

/// Displacement of chip b's content relative to chip a, in pixels
/// (dx along columns, dy along rows).
struct CorrelationPeak {
  double dx = 0;
  double dy = 0;
  double peak_correlation = 0;
  double snr = 0;
};

struct CorrelationOptions {
  int upsample = 32;
  double refine_half_width = 0.75;  // pixels around the coarse peak searched at the fine step
  int exclusion_radius = 3;         // peak neighbourhood left out of the snr background
  int border_margin = 2;
};

namespace detail {

inline double parabola_vertex(double left, double mid, double right) {
  const double den = left - 2.0 * mid + right;
  if (!(den < 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

inline int wrap_index(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<int>(((i % m) + m) % m);
}

inline long circular_distance(long i, std::size_t n) {
  const long w = wrap_index(i, n);
  return std::min(w, long(n) - w);
}

inline double signed_freq(std::size_t k, std::size_t n) {
  return k <= n / 2 ? double(k) : double(k) - double(n);
}

/// exp(2 pi i f_k x_j / n) for every signed frequency f_k and sample position x_j.
inline Eigen::MatrixXcd dft_kernel(std::size_t n, const std::vector<double>& positions) {
  Eigen::MatrixXcd e(n, positions.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double f = signed_freq(k, n);
    for (std::size_t j = 0; j < positions.size(); ++j) {
      const double turns = std::fmod(f * positions[j], double(n)) / double(n);
      e(k, j) = std::polar(1.0, 2.0 * std::numbers::pi * turns);
    }
  }
  return e;
}

}  // namespace detail

/// Normalised circular cross-correlation of two amplitude chips with
/// matrix-DFT upsampling around the integer peak.
inline CorrelationPeak amplitude_cross_correlate(const Raster<double>& a, const Raster<double>& b, int max_shift,
                                                 const CorrelationOptions& opt = {}) {
  const std::size_t rows = a.rows(), cols = a.cols();
  if (b.rows() != rows || b.cols() != cols) throw Error(Errc::Usage, "correlation chips differ in size");
  if (std::min(rows, cols) < 64) throw Error(Errc::Usage, "correlation chips must be at least 64 px on a side");
  if (max_shift < 1 || 4 * std::size_t(max_shift) >= std::min(rows, cols))
    throw Error(Errc::Usage, "max_shift must be positive and below a quarter of the chip side");

  Fft2D fa(rows, cols), fb(rows, cols);
  auto load = [&](const Raster<double>& src, Fft2D& dst, const char* name) {
    double mean = 0.0;
    for (double v : src.values()) mean += v;
    mean /= double(src.size());
    double energy = 0.0;
    for (double v : src.values()) energy += (v - mean) * (v - mean);
    if (!(energy > 1e-24 * double(src.size()) * std::max(1.0, mean * mean)))
      throw Error(Errc::FlatChip, std::string(name) + " has no amplitude variance");
    const double scale = 1.0 / std::sqrt(energy);
    for (std::size_t i = 0; i < src.size(); ++i) dst.data()[i] = (src.values()[i] - mean) * scale;
  };
  load(a, fa, "chip a");
  load(b, fb, "chip b");
  fa.forward();
  fb.forward();
  const double norm = 1.0 / double(rows * cols);
  for (std::size_t i = 0; i < fa.size(); ++i) fa.data()[i] = std::conj(fa.data()[i]) * fb.data()[i] * norm;

  // Keep the cross-spectrum for the fine stage; fb becomes the surface.
  std::copy(fa.data(), fa.data() + fa.size(), fb.data());
  fb.inverse();
  auto surface = [&](long dy, long dx) {
    return fb(detail::wrap_index(dy, rows), detail::wrap_index(dx, cols)).real();
  };

  long py = 0, px = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (long dy = -max_shift; dy <= max_shift; ++dy)
    for (long dx = -max_shift; dx <= max_shift; ++dx)
      if (const double v = surface(dy, dx); v > best) best = v, py = dy, px = dx;
  if (std::abs(py) >= max_shift - opt.border_margin || std::abs(px) >= max_shift - opt.border_margin)
    throw Error(Errc::PeakAtBorder, "integer peak at (" + std::to_string(px) + ", " + std::to_string(py) +
                                        ") is within " + std::to_string(opt.border_margin) + " px of the search limit");

  double background = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (detail::circular_distance(long(r) - py, rows) <= opt.exclusion_radius &&
          detail::circular_distance(long(c) - px, cols) <= opt.exclusion_radius)
        continue;
      background += std::abs(fb(r, c).real());
      ++count;
    }
  background /= double(std::max<std::size_t>(count, 1));

  // Coarse sub-pixel guess, then evaluate the band-limited surface on a fine
  // grid around it directly from the cross-spectrum.
  const double up = opt.upsample;
  const double gy = py + detail::parabola_vertex(surface(py - 1, px), best, surface(py + 1, px));
  const double gx = px + detail::parabola_vertex(surface(py, px - 1), best, surface(py, px + 1));
  const double cy = std::round(gy * up) / up, cx = std::round(gx * up) / up;
  const int half = static_cast<int>(std::ceil(opt.refine_half_width * up));
  std::vector<double> ys, xs;
  for (int j = -half; j <= half; ++j) {
    ys.push_back(cy + j / up);
    xs.push_back(cx + j / up);
  }
  const Eigen::MatrixXcd ey = detail::dft_kernel(rows, ys);
  const Eigen::MatrixXcd ex = detail::dft_kernel(cols, xs);
  using RowMajor = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> spectrum(fa.data(), long(rows), long(cols));
  const Eigen::MatrixXcd fine = ey.transpose() * (spectrum * ex);

  long fr = 0, fc = 0;
  double fine_best = -std::numeric_limits<double>::infinity();
  for (long r = 0; r < fine.rows(); ++r)
    for (long c = 0; c < fine.cols(); ++c)
      if (fine(r, c).real() > fine_best) fine_best = fine(r, c).real(), fr = r, fc = c;
  double sy = 0.0, sx = 0.0;
  if (fr > 0 && fr + 1 < fine.rows())
    sy = detail::parabola_vertex(fine(fr - 1, fc).real(), fine_best, fine(fr + 1, fc).real());
  if (fc > 0 && fc + 1 < fine.cols())
    sx = detail::parabola_vertex(fine(fr, fc - 1).real(), fine_best, fine(fr, fc + 1).real());

  CorrelationPeak out;
  out.dy = ys[fr] + sy / up;
  out.dx = xs[fc] + sx / up;
  out.peak_correlation = fine_best;
  out.snr = background > 0 ? fine_best / background : std::numeric_limits<double>::max();
  return out;
}

}  // namespace wvstack
