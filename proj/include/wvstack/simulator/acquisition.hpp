#pragma once

#include <cmath>
#include <cstddef>

#include "wvstack/geometry/orbit.hpp"
#include "wvstack/geometry/radar_geometry.hpp"
#include "wvstack/geometry/sensor.hpp"
#include "wvstack/geometry/zero_doppler.hpp"

namespace wvstack::sim {

/// Slant range at which the right-looking beam meets the surface at the
/// requested incidence angle, at orbit time t.
inline double slant_range_for_incidence(const OrbitModel& orbit, double t, double incidence_deg, double height = 0.0) {
  const OrbitState s = orbit.state(t);
  const double altitude = s.position.norm() - wgs84::b;
  double lo = std::max(1000.0, 0.5 * altitude), hi = 3.0 * altitude;
  auto incidence = [&](double range) {
    return heading_incidence_at(s, range_doppler_to_ground(orbit, t, range, height)).incidence_deg;
  };
  for (int k = 0; k < 200; ++k) {
    try {
      if (incidence(lo) < incidence_deg) break;
    } catch (const Error&) {
    }
    lo = 0.5 * (lo + altitude);
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    double inc = 90.0;
    try {
      inc = incidence(mid);
    } catch (const Error&) {
    }
    (inc < incidence_deg ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Radar geometry centred on orbit time `t_center` with mid-swath incidence
/// at the beam's nominal value.
inline RadarGeometry design_geometry(const OrbitModel& orbit, double t_center, Beam beam, std::size_t n_lines,
                                     std::size_t n_samples, double height = 0.0) {
  RadarGeometry g;
  g.beam = beam;
  g.prf = sensor::prf;
  g.azimuth_interval = 1.0 / sensor::prf;
  g.range_spacing = sensor::range_spacing(beam);
  g.wavelength = sensor::wavelength;
  g.n_lines = n_lines;
  g.n_samples = n_samples;
  g.azimuth_start = t_center - 0.5 * static_cast<double>(n_lines) * g.azimuth_interval;
  const double mid_range = slant_range_for_incidence(orbit, t_center, sensor::nominal_incidence_deg(beam), height);
  g.near_range = mid_range - 0.5 * static_cast<double>(n_samples) * g.range_spacing;
  g.validate();
  return g;
}

}  // namespace wvstack::sim
