#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wvstack/coregistration/correlate.hpp"
#include "wvstack/core/parallel.hpp"
#include "wvstack/geometry/map_grid.hpp"

namespace wvstack {

struct OffsetMeasurement {
  std::string scene_a;
  std::string scene_b;
  double d_east = 0;   // displacement of b relative to a, metres
  double d_north = 0;
  double peak_correlation = 0;
  double snr = 0;
  double window_east = 0;  // map coordinates of the mean accepted window centre
  double window_north = 0;
  std::size_t window_size = 0;
  std::size_t windows_used = 0;
};

/// Where and how correlation windows are placed inside a pair's overlap.
struct WindowPlan {
  std::size_t size = 1024;
  std::size_t max_per_axis = 2;
  int max_shift = 32;
  double min_valid_fraction = 0.95;
  double min_peak = 0.05;
  int jobs = 1;
};

struct WindowResult {
  std::size_t row0 = 0, col0 = 0;
  std::optional<CorrelationPeak> peak;  // empty when rejected
  std::string rejection;
};

namespace detail {

/// Weighted median; an exact half-weight split averages the two straddling values.
inline double weighted_median(std::vector<std::pair<double, double>> vw) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& [v, w] : vw) total += w;
  double acc = 0.0;
  for (std::size_t i = 0; i < vw.size(); ++i) {
    acc += vw[i].second;
    if (std::abs(acc - 0.5 * total) <= 1e-12 * total && i + 1 < vw.size()) return 0.5 * (vw[i].first + vw[i + 1].first);
    if (acc > 0.5 * total) return vw[i].first;
  }
  return vw.back().first;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Amplitude chip of `src` starting at (r0, c0) in its own grid; cells outside
/// `joint` are filled with the chip's valid mean.
inline Raster<double> amplitude_chip(const GeocodedRaster& src, long r0, long c0, std::size_t size,
                                     const Mask& joint, std::size_t jr0, std::size_t jc0) {
  Raster<double> chip(size, size);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c)
      if (joint(jr0 + r, jc0 + c)) {
        const double v = std::abs(src.samples(std::size_t(r0 + long(r)), std::size_t(c0 + long(c))));
        chip(r, c) = v;
        sum += v;
        ++n;
      }
  const double fill = n ? sum / double(n) : 0.0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c)
      if (!joint(jr0 + r, jc0 + c)) chip(r, c) = fill;
  return chip;
}

}  // namespace detail

/// Bulk map-domain shift of b relative to a from non-overlapping amplitude
/// correlation windows tiled over the jointly valid region.
inline OffsetMeasurement measure_pair(const GeocodedRaster& a, const GeocodedRaster& b, const WindowPlan& plan = {},
                                      std::vector<WindowResult>* details = nullptr) {
  if (!(a.grid.frame == b.grid.frame) || a.grid.posting != b.grid.posting)
    throw Error(Errc::GridMismatch, "pair rasters use different map frames or postings");
  const double p = a.grid.posting;
  const double col_off = (b.grid.east0 - a.grid.east0) / p, row_off = (a.grid.north0 - b.grid.north0) / p;
  if (std::abs(col_off - std::round(col_off)) > 1e-6 || std::abs(row_off - std::round(row_off)) > 1e-6)
    throw Error(Errc::GridMismatch, "pair rasters are not cell-aligned");
  const long dc = std::lround(col_off), dr = std::lround(row_off);  // b cell (r, c) == a cell (r + dr, c + dc)

  // Shared extent in a's index space.
  const long r_lo = std::max(0L, dr), r_hi = std::min<long>(a.grid.n_north, dr + long(b.grid.n_north));
  const long c_lo = std::max(0L, dc), c_hi = std::min<long>(a.grid.n_east, dc + long(b.grid.n_east));
  if (r_hi - r_lo < long(plan.size) || c_hi - c_lo < long(plan.size))
    throw Error(Errc::InsufficientOverlap, "grid overlap is smaller than one correlation window");

  Mask joint(std::size_t(r_hi - r_lo), std::size_t(c_hi - c_lo), 0);
  long jr_min = long(joint.rows()), jr_max = -1, jc_min = long(joint.cols()), jc_max = -1;
  for (long r = r_lo; r < r_hi; ++r)
    for (long c = c_lo; c < c_hi; ++c)
      if (a.valid(r, c) && b.valid(r - dr, c - dc)) {
        joint(r - r_lo, c - c_lo) = 1;
        jr_min = std::min(jr_min, r - r_lo), jr_max = std::max(jr_max, r - r_lo);
        jc_min = std::min(jc_min, c - c_lo), jc_max = std::max(jc_max, c - c_lo);
      }
  const long ext_r = jr_max - jr_min + 1, ext_c = jc_max - jc_min + 1;
  if (jr_max < 0 || ext_r < long(plan.size) || ext_c < long(plan.size))
    throw Error(Errc::InsufficientOverlap, "jointly valid region is smaller than one correlation window");

  const std::size_t nr = std::min<std::size_t>(plan.max_per_axis, std::size_t(ext_r) / plan.size);
  const std::size_t nc = std::min<std::size_t>(plan.max_per_axis, std::size_t(ext_c) / plan.size);
  std::vector<WindowResult> windows(nr * nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      windows[i * nc + j].row0 = std::size_t(jr_min) + (std::size_t(ext_r) - nr * plan.size) / 2 + i * plan.size;
      windows[i * nc + j].col0 = std::size_t(jc_min) + (std::size_t(ext_c) - nc * plan.size) / 2 + j * plan.size;
    }

  parallel_for(windows.size(), plan.jobs, [&](std::size_t k) {
    auto& w = windows[k];
    std::size_t valid = 0;
    for (std::size_t r = 0; r < plan.size; ++r)
      for (std::size_t c = 0; c < plan.size; ++c) valid += joint(w.row0 + r, w.col0 + c);
    if (double(valid) < plan.min_valid_fraction * double(plan.size * plan.size)) {
      w.rejection = "too few valid cells";
      return;
    }
    const long ar = r_lo + long(w.row0), ac = c_lo + long(w.col0);
    const auto chip_a = detail::amplitude_chip(a, ar, ac, plan.size, joint, w.row0, w.col0);
    const auto chip_b = detail::amplitude_chip(b, ar - dr, ac - dc, plan.size, joint, w.row0, w.col0);
    try {
      auto peak = amplitude_cross_correlate(chip_a, chip_b, plan.max_shift);
      if (peak.peak_correlation < plan.min_peak)
        w.rejection = "peak below floor";
      else
        w.peak = peak;
    } catch (const Error& e) {
      if (e.code() != Errc::FlatChip && e.code() != Errc::PeakAtBorder) throw;
      w.rejection = e.what();
    }
  });
  if (details) *details = windows;

  std::vector<std::pair<double, double>> xs, ys;
  std::vector<double> peaks, snrs;
  double ce = 0.0, cn = 0.0;
  for (const auto& w : windows) {
    if (!w.peak) continue;
    xs.emplace_back(w.peak->dx, w.peak->snr);
    ys.emplace_back(w.peak->dy, w.peak->snr);
    peaks.push_back(w.peak->peak_correlation);
    snrs.push_back(w.peak->snr);
    const double half = (double(plan.size) - 1.0) / 2.0;
    ce += a.grid.east(double(c_lo + long(w.col0)) + half);
    cn += a.grid.north(double(r_lo + long(w.row0)) + half);
  }
  if (xs.empty()) throw Error(Errc::AllWindowsRejected, "no correlation window passed the quality checks");

  OffsetMeasurement m;
  m.d_east = detail::weighted_median(xs) * p;
  m.d_north = -detail::weighted_median(ys) * p;
  m.peak_correlation = detail::median(peaks);
  m.snr = detail::median(snrs);
  m.window_east = ce / double(xs.size());
  m.window_north = cn / double(xs.size());
  m.window_size = plan.size;
  m.windows_used = xs.size();
  return m;
}

}  // namespace wvstack
