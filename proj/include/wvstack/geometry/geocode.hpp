#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "wvstack/core/error.hpp"
#include "wvstack/core/parallel.hpp"
#include "wvstack/core/raster.hpp"
#include "wvstack/geometry/interpolation.hpp"
#include "wvstack/geometry/map_grid.hpp"
#include "wvstack/geometry/radar_geometry.hpp"
#include "wvstack/geometry/zero_doppler.hpp"

namespace wvstack {

struct GeocodeOptions {
  double height = 0.0;
  int jobs = 1;
  Carrier carrier{};
  ZeroDopplerOptions zero_doppler{};
};

/// Map-plane corners of the radar raster (first line/near, first/far, last/far, last/near).
inline std::array<Eigen::Vector2d, 4> radar_footprint_on_map(const RadarGeometry& geom, const OrbitModel& orbit,
                                                             const LocalFrame& frame, double height) {
  const double l1 = static_cast<double>(geom.n_lines) - 1.0, s1 = static_cast<double>(geom.n_samples) - 1.0;
  const std::array<std::pair<double, double>, 4> corners{{{0, 0}, {0, s1}, {l1, s1}, {l1, 0}}};
  std::array<Eigen::Vector2d, 4> out;
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = frame.to_map(radar_to_ground(geom, orbit, corners[i].first, corners[i].second, height));
  return out;
}

/// Nearest-neighbour sample; returns `outside` beyond the raster.
template <class T>
T nearest_sample(const Raster<T>& r, double row, double col, T outside = T{}) {
  const long rr = std::lround(row), cc = std::lround(col);
  if (rr < 0 || cc < 0 || rr >= static_cast<long>(r.rows()) || cc >= static_cast<long>(r.cols())) return outside;
  return r(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
}

/// Direct geocoding: every map cell is mapped to (line, sample) through a
/// zero-Doppler solve against the orbit and sampled with the 8-tap kernel.
/// Cells that fall outside the radar raster are masked.
inline GeocodedRaster geocode(const Raster<cfloat>& slc, const RadarGeometry& geom, const OrbitModel& orbit,
                              const MapGrid& grid, const GeocodeOptions& opt = {}) {
  if (slc.rows() != geom.n_lines || slc.cols() != geom.n_samples)
    throw Error(Errc::InvalidGeometry, "SLC dimensions do not match radar geometry");

  const auto fp = radar_footprint_on_map(geom, orbit, grid.frame, opt.height);
  double e_lo = std::numeric_limits<double>::max(), e_hi = -e_lo, n_lo = e_lo, n_hi = -e_lo;
  for (const auto& p : fp) {
    e_lo = std::min(e_lo, p[0]); e_hi = std::max(e_hi, p[0]);
    n_lo = std::min(n_lo, p[1]); n_hi = std::max(n_hi, p[1]);
  }
  const double ge_hi = grid.east(static_cast<double>(grid.n_east) - 1), gn_lo = grid.north(static_cast<double>(grid.n_north) - 1);
  if (e_hi < grid.east0 || e_lo > ge_hi || n_hi < gn_lo || n_lo > grid.north0)
    throw Error(Errc::GridDisjoint, "map grid does not overlap the vignette footprint");

  GeocodedRaster out(grid);
  const double max_line = static_cast<double>(geom.n_lines) - 1.0;
  const double max_sample = static_cast<double>(geom.n_samples) - 1.0;
  const SincKernel& kernel = SincKernel::standard();

  parallel_for(grid.n_north, opt.jobs, [&](std::size_t row) {
    double t_guess = geom.mid_time();
    const double n = grid.north(static_cast<double>(row));
    for (std::size_t col = 0; col < grid.n_east; ++col) {
      const Vec3 x = grid.frame.to_ecef(grid.east(static_cast<double>(col)), n, opt.height);
      ZeroDopplerSolution sol{};
      try {
        sol = zero_doppler_solve(orbit, x, t_guess, opt.zero_doppler);
      } catch (const Error&) {
        t_guess = geom.mid_time();
        continue;
      }
      t_guess = sol.t_az;
      const double line = geom.line_of(sol.t_az);
      const double sample = geom.sample_of(sol.slant_range);
      if (line < 0 || line > max_line || sample < 0 || sample > max_sample) continue;
      const auto v = sinc_sample(slc, line, sample, kernel, opt.carrier);
      out.samples(row, col) = cfloat(static_cast<float>(v.real()), static_cast<float>(v.imag()));
      out.mask(row, col) = 1;
    }
  });
  if (out.valid_count() == 0) throw Error(Errc::GridDisjoint, "no map cell maps inside the radar raster");
  return out;
}

}  // namespace wvstack
