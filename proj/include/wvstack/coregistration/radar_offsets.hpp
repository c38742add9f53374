#pragma once

#include <cmath>

#include "wvstack/coregistration/network.hpp"
#include "wvstack/geometry/ellipsoid.hpp"
#include "wvstack/geometry/map_grid.hpp"
#include "wvstack/geometry/radar_geometry.hpp"
#include "wvstack/geometry/zero_doppler.hpp"

namespace wvstack {

struct RadarOffset {
  double dt_azimuth = 0;  // ms
  double d_range = 0;     // m, slant
};

struct MapOffset {
  double d_east = 0;
  double d_north = 0;
};

namespace detail {
inline void check_conversion(double incidence_deg, double ground_speed) {
  if (!(incidence_deg > 0.0 && incidence_deg < 90.0))
    throw Error(Errc::InvalidIncidence, "incidence " + std::to_string(incidence_deg) + " deg outside (0, 90)");
  if (!(ground_speed > 0.0)) throw Error(Errc::InvalidIncidence, "ground speed must be positive");
}
}  // namespace detail

/// Rotates a map shift into along-track time and slant range for a right-looking
/// sensor heading `heading_deg` clockwise from north.
inline RadarOffset map_to_radar(double d_east, double d_north, double heading_deg, double incidence_deg,
                                double ground_speed) {
  detail::check_conversion(incidence_deg, ground_speed);
  const double h = deg2rad(heading_deg);
  const double along = d_east * std::sin(h) + d_north * std::cos(h);
  const double ground_range = d_east * std::cos(h) - d_north * std::sin(h);
  return {1000.0 * along / ground_speed, ground_range * std::sin(deg2rad(incidence_deg))};
}

inline MapOffset radar_to_map(double dt_azimuth_ms, double d_range, double heading_deg, double incidence_deg,
                              double ground_speed) {
  detail::check_conversion(incidence_deg, ground_speed);
  const double h = deg2rad(heading_deg);
  const double along = dt_azimuth_ms * ground_speed / 1000.0;
  const double ground_range = d_range / std::sin(deg2rad(incidence_deg));
  return {along * std::sin(h) + ground_range * std::cos(h), along * std::cos(h) - ground_range * std::sin(h)};
}

/// Local linear relation between radar offsets and the map displacement they
/// cause, from central differences of the range-Doppler ground solution. Unlike
/// the heading/incidence rotation it follows the true iso-range direction on
/// the ellipsoid, which departs from the heading by a few tenths of a degree.
struct OffsetJacobian {
  Eigen::Matrix2d m;  // columns: d(east, north)/d(ms), d(east, north)/d(m slant)

  RadarOffset to_radar(double d_east, double d_north) const {
    const Eigen::Vector2d x = m.partialPivLu().solve(Eigen::Vector2d(d_east, d_north));
    return {x[0], x[1]};
  }
  MapOffset to_map(const RadarOffset& r) const {
    const Eigen::Vector2d d = m * Eigen::Vector2d(r.dt_azimuth, r.d_range);
    return {d[0], d[1]};
  }
};

inline OffsetJacobian offset_jacobian(const OrbitModel& orbit, const RadarGeometry& geom, const LocalFrame& frame,
                                      const Vec3& ground, double height) {
  const auto sol = zero_doppler_solve(orbit, ground, geom.mid_time());
  auto at = [&](double dt_ms, double dr) {
    return frame.to_map(range_doppler_to_ground(orbit, sol.t_az + dt_ms / 1000.0, sol.slant_range + dr, height));
  };
  OffsetJacobian j;
  j.m.col(0) = (at(1.0, 0.0) - at(-1.0, 0.0)) / 2.0;
  j.m.col(1) = (at(0.0, 1.0) - at(0.0, -1.0)) / 2.0;
  if (!(std::abs(j.m.determinant()) > 1e-9)) throw Error(Errc::SingularSystem, "degenerate radar-to-map Jacobian");
  return j;
}

/// Moves the metadata so that re-geocoding lands the scene on the reference.
inline RadarGeometry apply_offsets(RadarGeometry geom, const SceneOffset& offset) {
  geom.azimuth_start -= offset.dt_azimuth / 1000.0;
  geom.near_range -= offset.d_range;
  return geom;
}

}  // namespace wvstack
