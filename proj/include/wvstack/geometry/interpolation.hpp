#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "wvstack/core/raster.hpp"

namespace wvstack {

/// Kaiser-windowed sinc with 8 taps, tabulated at 1/2048-sample resolution.
/// Each table row is normalised to unit DC gain.
class SincKernel {
 public:
  static constexpr int taps = 8;
  static constexpr int half = taps / 2;
  static constexpr int resolution = 2048;

  explicit SincKernel(double beta = 5.0) : table_(static_cast<std::size_t>(resolution + 1)) {
    const double i0b = bessel_i0(beta);
    for (int k = 0; k <= resolution; ++k) {
      const double frac = static_cast<double>(k) / resolution;
      auto& row = table_[static_cast<std::size_t>(k)];
      double sum = 0;
      for (int j = 0; j < taps; ++j) {
        const double x = frac - static_cast<double>(j - half + 1);
        const double u = x / half;
        const double window = std::abs(u) >= 1.0 ? 0.0 : bessel_i0(beta * std::sqrt(1.0 - u * u)) / i0b;
        const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        row[static_cast<std::size_t>(j)] = sinc * window;
        sum += row[static_cast<std::size_t>(j)];
      }
      for (auto& w : row) w /= sum;
    }
  }

  /// Weights for taps at floor(x) - 3 ... floor(x) + 4.
  const std::array<double, taps>& weights(double frac) const {
    return table_[static_cast<std::size_t>(std::lround(frac * resolution))];
  }

  static const SincKernel& standard() {
    static const SincKernel k;
    return k;
  }

 private:
  static double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 50; ++k) {
      term *= (x / (2.0 * k)) * (x / (2.0 * k));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }

  std::vector<std::array<double, taps>> table_;
};

/// Linear phase carried by the raster, in cycles per line and per sample.
/// Interpolation demodulates before filtering and remodulates afterwards so
/// that off-baseband content keeps its phase.
struct Carrier {
  double azimuth = 0.0;
  double range = 0.0;
  bool none() const { return azimuth == 0.0 && range == 0.0; }
};

/// Band-limited sample of `r` at fractional (row, col); out-of-raster taps read zero.
template <class T>
std::complex<double> sinc_sample(const Raster<std::complex<T>>& r, double row, double col,
                                 const SincKernel& kernel = SincKernel::standard(), const Carrier& carrier = {}) {
  const double fr = std::floor(row), fc = std::floor(col);
  const auto& wr = kernel.weights(row - fr);
  const auto& wc = kernel.weights(col - fc);
  const long r0 = static_cast<long>(fr) - SincKernel::half + 1;
  const long c0 = static_cast<long>(fc) - SincKernel::half + 1;
  const long rows = static_cast<long>(r.rows()), cols = static_cast<long>(r.cols());

  std::array<std::complex<double>, SincKernel::taps> cw;
  for (int j = 0; j < SincKernel::taps; ++j) {
    cw[static_cast<std::size_t>(j)] = wc[static_cast<std::size_t>(j)];
    if (carrier.range != 0.0) {
      const double ph = 2.0 * std::numbers::pi * carrier.range * (col - static_cast<double>(c0 + j));
      cw[static_cast<std::size_t>(j)] *= std::polar(1.0, ph);
    }
  }
  std::complex<double> acc{};
  for (int i = 0; i < SincKernel::taps; ++i) {
    const long rr = r0 + i;
    if (rr < 0 || rr >= rows) continue;
    std::complex<double> row_acc{};
    const auto line = r.row(static_cast<std::size_t>(rr));
    for (int j = 0; j < SincKernel::taps; ++j) {
      const long cc = c0 + j;
      if (cc < 0 || cc >= cols) continue;
      const auto& v = line[static_cast<std::size_t>(cc)];
      row_acc += cw[static_cast<std::size_t>(j)] * std::complex<double>(v.real(), v.imag());
    }
    std::complex<double> w = wr[static_cast<std::size_t>(i)];
    if (carrier.azimuth != 0.0) w *= std::polar(1.0, 2.0 * std::numbers::pi * carrier.azimuth * (row - static_cast<double>(rr)));
    acc += w * row_acc;
  }
  return acc;
}

}  // namespace wvstack
