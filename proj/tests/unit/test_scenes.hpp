#pragma once

#include "wvstack/geometry/radar_geometry.hpp"
#include "wvstack/simulator/acquisition.hpp"
#include "wvstack/simulator/circular_orbit.hpp"

namespace wvstack::testing {

/// Descending pass over roughly 27 S, 37 W with the scene centre at orbit time 0.
inline sim::CircularOrbit descending_orbit() {
  sim::CircularOrbit c;
  c.ascending_node_lon_deg = 150.0;
  c.u0_deg = 207.3;
  return c;
}

inline UtcTime test_epoch() { return parse_utc("2023-06-01T08:30:00.000000Z"); }

inline OrbitModel test_orbit(double spacing = 10.0) {
  return descending_orbit().sample(test_epoch(), -60.0, 60.0, spacing);
}

inline RadarGeometry test_geometry(const OrbitModel& orbit, Beam beam, std::size_t lines = 512,
                                   std::size_t samples = 512) {
  return sim::design_geometry(orbit, 0.0, beam, lines, samples);
}

}  // namespace wvstack::testing
