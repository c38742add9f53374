#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "wvstack/core/png.hpp"
#include "wvstack/stack/manifest.hpp"

namespace wvstack {

struct PercentileStretch {
  double low = 2.0;
  double high = 98.0;
};

/// Percentile of `sorted` with linear interpolation between order statistics.
inline double percentile(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) return 0.0;
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * double(sorted.size() - 1);
  const auto i = std::size_t(std::floor(pos));
  const double f = pos - double(i);
  return i + 1 < sorted.size() ? sorted[i] * (1 - f) + sorted[i + 1] * f : sorted[i];
}

/// One 8-bit band: amplitude in dB, clipped to the stretch percentiles of the
/// valid cells and scaled to 0..255. Masked cells are 0.
inline Raster<std::uint8_t> stretch_band(const GeocodedRaster& r, const PercentileStretch& stretch) {
  std::vector<double> db;
  Raster<double> values(r.samples.rows(), r.samples.cols(), 0.0);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    if (!r.mask.values()[i]) continue;
    const double v = 20.0 * std::log10(std::max(double(std::abs(r.samples.values()[i])), 1e-10));
    values.values()[i] = v;
    db.push_back(v);
  }
  std::sort(db.begin(), db.end());
  const double lo = percentile(db, stretch.low), hi = percentile(db, stretch.high);
  Raster<std::uint8_t> band(r.samples.rows(), r.samples.cols(), 0);
  for (std::size_t i = 0; i < band.size(); ++i) {
    if (!r.mask.values()[i]) continue;
    const double t = hi > lo ? (values.values()[i] - lo) / (hi - lo) : 0.5;
    band.values()[i] = std::uint8_t(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
  }
  return band;
}

inline Raster<Rgb> rgb_composite(const StackManifest& stack, const std::filesystem::path& stack_dir,
                                 const std::array<std::string, 3>& dates, const PercentileStretch& stretch = {}) {
  if (std::set<std::string>(dates.begin(), dates.end()).size() != 3)
    throw Error(Errc::Usage, "composite needs three distinct members");
  std::array<Raster<std::uint8_t>, 3> bands;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto* m = stack.find(dates[k]);
    if (!m) throw Error(Errc::MemberNotInStack, dates[k] + " is not in stack " + stack.stack_id);
    bands[k] = stretch_band(GeocodedRaster::load(stack_dir / m->raster), stretch);
  }
  Raster<Rgb> img(stack.grid.n_north, stack.grid.n_east);
  for (std::size_t i = 0; i < img.size(); ++i)
    img.values()[i] = {bands[0].values()[i], bands[1].values()[i], bands[2].values()[i]};
  return img;
}

}  // namespace wvstack
