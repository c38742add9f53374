#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "wvstack/core/error.hpp"
#include "wvstack/geometry/map_grid.hpp"

namespace wvstack {

/// Complex multilook by `factor` x `factor` blocks. Edge blocks that run past
/// the raster are padded with masked cells. A cell is valid when at least half
/// of its block is valid; its value is the mean over the valid samples.
inline GeocodedRaster downsample_grid(const GeocodedRaster& r, int factor) {
  if (factor < 1) throw Error(Errc::Usage, "downsample factor must be >= 1");
  if (factor == 1) return r;
  const auto f = std::size_t(factor);
  MapGrid g = r.grid;
  g.posting = r.grid.posting * double(factor);
  g.east0 = r.grid.east0 + 0.5 * double(factor - 1) * r.grid.posting;
  g.north0 = r.grid.north0 - 0.5 * double(factor - 1) * r.grid.posting;
  g.n_east = (r.grid.n_east + f - 1) / f;
  g.n_north = (r.grid.n_north + f - 1) / f;
  GeocodedRaster out(g);
  const std::size_t need = (f * f + 1) / 2;
  for (std::size_t R = 0; R < g.n_north; ++R)
    for (std::size_t C = 0; C < g.n_east; ++C) {
      std::complex<double> sum{};
      std::size_t count = 0;
      for (std::size_t r0 = R * f; r0 < std::min(R * f + f, r.grid.n_north); ++r0)
        for (std::size_t c0 = C * f; c0 < std::min(C * f + f, r.grid.n_east); ++c0)
          if (r.mask(r0, c0)) sum += std::complex<double>(r.samples(r0, c0)), ++count;
      if (count < need) continue;
      sum /= double(count);
      out.samples(R, C) = cfloat(float(sum.real()), float(sum.imag()));
      out.mask(R, C) = 1;
    }
  return out;
}

/// Coherence-normalised interferogram between two epochs of a stack.
struct Interferogram {
  std::string member_a, member_b;
  std::size_t epoch_a = 0, epoch_b = 0;
  double temporal_baseline = 0;  // days
  int looks = 5;
  MapGrid grid;
  Raster<cfloat> samples;  // sum(a conj b) / sqrt(sum|a|^2 sum|b|^2)
  Raster<float> coherence;
  Mask mask;

  double phase(std::size_t r, std::size_t c) const { return std::arg(samples(r, c)); }
};

namespace detail {

/// Centred running sum over a (2h+1) window along rows then columns.
template <class T>
Raster<T> box_sum(const Raster<T>& in, std::size_t h) {
  const std::size_t rows = in.rows(), cols = in.cols();
  Raster<T> tmp(rows, cols), out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    T acc{};
    for (std::size_t c = 0; c < std::min(cols, h); ++c) acc += in(r, c);
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + h < cols) acc += in(r, c + h);
      if (c > h) acc -= in(r, c - h - 1);
      tmp(r, c) = acc;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    T acc{};
    for (std::size_t r = 0; r < std::min(rows, h); ++r) acc += tmp(r, c);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r + h < rows) acc += tmp(r + h, c);
      if (r > h) acc -= tmp(r - h - 1, c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Boxcar interferogram and coherence over a `looks` x `looks` window. Only
/// cells valid in both inputs contribute; an output cell is valid when its
/// centre is and at least half the window is.
inline Interferogram form_interferogram(const GeocodedRaster& a, const GeocodedRaster& b, int looks = 5) {
  if (!(a.grid == b.grid)) throw Error(Errc::GridMismatch, "interferogram inputs are on different grids");
  if (looks < 1 || looks % 2 == 0) throw Error(Errc::Usage, "looks must be a positive odd number");
  const std::size_t rows = a.grid.n_north, cols = a.grid.n_east;
  Raster<std::complex<double>> cross(rows, cols);
  Raster<double> pa(rows, cols), pb(rows, cols), n(rows, cols);
  for (std::size_t i = 0; i < cross.size(); ++i) {
    if (!a.mask.values()[i] || !b.mask.values()[i]) continue;
    const std::complex<double> za(a.samples.values()[i]), zb(b.samples.values()[i]);
    cross.values()[i] = za * std::conj(zb);
    pa.values()[i] = std::norm(za);
    pb.values()[i] = std::norm(zb);
    n.values()[i] = 1.0;
  }
  const auto h = std::size_t(looks / 2);
  const auto sc = detail::box_sum(cross, h);
  const auto sa = detail::box_sum(pa, h), sb = detail::box_sum(pb, h), sn = detail::box_sum(n, h);

  Interferogram ifg;
  ifg.looks = looks;
  ifg.grid = a.grid;
  ifg.samples = Raster<cfloat>(rows, cols);
  ifg.coherence = Raster<float>(rows, cols, 0.f);
  ifg.mask = Mask(rows, cols, 0);
  const double need = 0.5 * double(looks * looks);
  for (std::size_t i = 0; i < cross.size(); ++i) {
    if (n.values()[i] == 0.0 || sn.values()[i] < need) continue;
    const double denom = std::sqrt(sa.values()[i] * sb.values()[i]);
    if (!(denom > 0)) continue;
    const auto z = sc.values()[i] / denom;
    ifg.samples.values()[i] = cfloat(float(z.real()), float(z.imag()));
    ifg.coherence.values()[i] = float(std::min(1.0, std::abs(z)));
    ifg.mask.values()[i] = 1;
  }
  return ifg;
}

}  // namespace wvstack
