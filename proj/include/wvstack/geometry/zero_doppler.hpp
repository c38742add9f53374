#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wvstack/core/error.hpp"
#include "wvstack/geometry/ellipsoid.hpp"
#include "wvstack/geometry/orbit.hpp"
#include "wvstack/geometry/radar_geometry.hpp"

namespace wvstack {

struct ZeroDopplerOptions {
  double tolerance = 1e-10;  // |V.(X-P)| / (|V| |X-P|)
  int max_iterations = 25;
};

struct ZeroDopplerSolution {
  double t_az;
  double slant_range;
  int iterations;
};

/// Newton iteration on f(t) = V(t).(X - P(t)), f'(t) = A.(X - P) - |V|^2.
/// Once the relative Doppler drops below tolerance one more Newton step is
/// taken; at 1e-10 the time is otherwise only good to ~1e-8 s (~2e-5 line).
inline ZeroDopplerSolution zero_doppler_solve(const OrbitModel& orbit, const Vec3& ground, double t_guess,
                                              const ZeroDopplerOptions& opt = {}) {
  double t = t_guess;
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const OrbitState s = orbit.state(t);
    const Vec3 d = ground - s.position;
    const double f = s.velocity.dot(d);
    const double fp = s.acceleration.dot(d) - s.velocity.squaredNorm();
    if (std::abs(f) <= opt.tolerance * s.velocity.norm() * d.norm()) {
      const double polished = t - f / fp;
      if (!orbit.contains(polished)) return {t, d.norm(), it};
      return {polished, (ground - orbit.state(polished).position).norm(), it};
    }
    if (it == opt.max_iterations) break;
    t -= f / fp;
  }
  throw Error(Errc::NoConvergence, "zero-Doppler iteration did not converge in " + std::to_string(opt.max_iterations) +
                                       " iterations");
}

/// Right-looking intersection of the zero-Doppler plane at time t, the range
/// sphere |X - P| = range, and the ellipsoid inflated by `height`.
inline Vec3 range_doppler_to_ground(const OrbitModel& orbit, double t, double range, double height) {
  const OrbitState s = orbit.state(t);
  const Vec3 along = s.velocity.normalized();
  const Vec3 up = (s.position - s.position.dot(along) * along).normalized();
  const Vec3 right = along.cross(up);
  auto point = [&](double look) { return Vec3(s.position + range * (-std::cos(look) * up + std::sin(look) * right)); };

  // The residual grows monotonically with look angle between nadir and horizontal.
  double lo = 0.0, hi = 0.5 * std::numbers::pi;
  if (inflated_ellipsoid(point(lo), height) > 0.0 || inflated_ellipsoid(point(hi), height) < 0.0)
    throw Error(Errc::NoIntersection, "range sphere " + std::to_string(range) + " m misses the surface");
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (inflated_ellipsoid(point(mid), height) < 0.0 ? lo : hi) = mid;
  }
  return point(0.5 * (lo + hi));
}

/// Ground point imaged at fractional (line, sample).
inline Vec3 radar_to_ground(const RadarGeometry& geom, const OrbitModel& orbit, double line, double sample,
                            double height) {
  if (!(line >= 0 && line < static_cast<double>(geom.n_lines) && sample >= 0 &&
        sample < static_cast<double>(geom.n_samples)))
    throw Error(Errc::InvalidGeometry, "(line, sample) outside raster");
  return range_doppler_to_ground(orbit, geom.line_time(line), geom.sample_range(sample), height);
}

/// Fractional (line, sample) of a ground point.
struct RadarCoordinate {
  double line;
  double sample;
};

inline RadarCoordinate ground_to_radar(const RadarGeometry& geom, const OrbitModel& orbit, const Vec3& ground,
                                       double t_guess) {
  const auto sol = zero_doppler_solve(orbit, ground, t_guess);
  return {geom.line_of(sol.t_az), geom.sample_of(sol.slant_range)};
}

struct HeadingIncidence {
  double heading_deg;    // clockwise from north, [0, 360)
  double incidence_deg;  // from the local ellipsoid normal
};

inline HeadingIncidence heading_incidence_at(const OrbitState& s, const Vec3& ground) {
  const Geodetic g = ecef_to_geodetic(ground);
  const EnuBasis enu = enu_basis(g.lon_deg, g.lat_deg);
  double heading = rad2deg(std::atan2(s.velocity.dot(enu.east), s.velocity.dot(enu.north)));
  if (heading < 0) heading += 360.0;
  const Vec3 to_sat = (s.position - ground).normalized();
  const double c = std::clamp(to_sat.dot(enu.up), -1.0, 1.0);
  return {heading, rad2deg(std::acos(c))};
}

inline HeadingIncidence heading_incidence(const OrbitModel& orbit, const RadarGeometry& geom, const Vec3& ground) {
  const auto sol = zero_doppler_solve(orbit, ground, geom.mid_time());
  return heading_incidence_at(orbit.state(sol.t_az), ground);
}

/// Look angle off the geocentric nadir direction, degrees.
inline double look_angle(const OrbitModel& orbit, double t, const Vec3& ground) {
  const OrbitState s = orbit.state(t);
  const Vec3 los = (ground - s.position).normalized();
  return rad2deg(std::acos(std::clamp(los.dot(-s.position.normalized()), -1.0, 1.0)));
}

/// Speed of the zero-Doppler footprint across the surface at a ground point:
/// |dX/dt| for the constant-range surface intersection.
inline double ground_speed(const OrbitModel& orbit, const RadarGeometry& geom, const Vec3& ground, double height) {
  const auto sol = zero_doppler_solve(orbit, ground, geom.mid_time());
  const double dt = 0.05;
  const double t0 = std::max(orbit.start(), sol.t_az - dt), t1 = std::min(orbit.end(), sol.t_az + dt);
  const Vec3 a = range_doppler_to_ground(orbit, t0, sol.slant_range, height);
  const Vec3 b = range_doppler_to_ground(orbit, t1, sol.slant_range, height);
  return (b - a).norm() / (t1 - t0);
}

}  // namespace wvstack
