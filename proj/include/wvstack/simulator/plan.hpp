#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "wvstack/catalog/vignette.hpp"
#include "wvstack/geometry/geocode.hpp"
#include "wvstack/simulator/acquisition.hpp"
#include "wvstack/simulator/circular_orbit.hpp"
#include "wvstack/simulator/spec.hpp"

namespace wvstack::sim {

inline constexpr double vignette_extent_m = 20000.0;
inline constexpr double mean_earth_radius = 6371008.8;

/// One planned acquisition. The true geometries describe where the sensor
/// really imaged; `metadata` is what gets written, carrying the injected errors.
struct PlannedVignette {
  VignetteRecord record;
  OrbitModel orbit;              // epoch = pass start
  RadarGeometry full_geometry;   // true, full 20 km vignette
  RadarGeometry geometry;        // true, rendered central crop
  RadarGeometry metadata;        // perturbed crop
  std::size_t cycle = 0;
  std::size_t slot = 0;
  double timing_error_ms = 0;
  double range_error_m = 0;
  double days = 0;  // since the first cycle

  bool rendered = false;
};

inline CircularOrbit circular_orbit_of(const SimulationSpec& spec) {
  CircularOrbit c;
  c.altitude = spec.altitude;
  c.inclination_deg = spec.inclination_deg;
  c.ascending_node_lon_deg = spec.ascending_node_lon_deg;
  c.u0_deg = spec.start_u_deg;
  return c;
}

/// Beam of slot k: alternates every slot starting at `first`.
inline Beam leapfrog_beam(Beam first, std::size_t slot) {
  if (slot % 2 == 0) return first;
  return first == Beam::WV1 ? Beam::WV2 : Beam::WV1;
}

/// Orbit time (relative to the pass start) of the centre of slot k: the
/// sub-satellite point advances `along_track_spacing_m` per slot.
inline double slot_time(const SimulationSpec& spec, std::size_t slot) {
  const auto c = circular_orbit_of(spec);
  const double du = double(slot) * spec.along_track_spacing_m / mean_earth_radius;
  return du / c.mean_motion();
}

inline std::size_t full_lines(const CircularOrbit& c) {
  const double ground_step = c.speed() * wgs84::a / c.radius() / sensor::prf;
  return std::size_t(std::lround(vignette_extent_m / ground_step));
}

inline std::size_t full_samples(Beam beam) {
  return std::size_t(std::lround(vignette_extent_m * std::sin(deg2rad(sensor::nominal_incidence_deg(beam))) /
                                 sensor::range_spacing(beam)));
}

inline Ring footprint_lonlat(const RadarGeometry& g, const OrbitModel& orbit, double height) {
  const double l1 = double(g.n_lines) - 1.0, s1 = double(g.n_samples) - 1.0;
  Ring ring;
  for (auto [l, s] : {std::pair{0.0, 0.0}, {0.0, s1}, {l1, s1}, {l1, 0.0}}) {
    const Geodetic p = ecef_to_geodetic(radar_to_ground(g, orbit, l, s, height));
    ring.push_back({p.lon_deg, p.lat_deg});
  }
  return ring;
}

inline std::string vignette_id(const SimulationSpec& spec, Beam beam, UtcTime t, std::size_t slot) {
  std::string stamp = format_utc(t);  // YYYY-MM-DDTHH:MM:SS.ffffffZ
  stamp = stamp.substr(0, 4) + stamp.substr(5, 2) + stamp.substr(8, 5) + stamp.substr(14, 2) + stamp.substr(17, 2);
  char buf[96];
  std::snprintf(buf, sizeof buf, "S1%s_%s_%s_%03d_v%02zu", to_string(spec.satellite).c_str(), to_string(beam).c_str(),
                stamp.c_str(), spec.relative_orbit, slot);
  return buf;
}

inline std::string granule_id(const SimulationSpec& spec, std::size_t cycle) {
  const UtcTime t = add_seconds(spec.epoch, cycle * spec.repeat_interval_days * 86400.0);
  std::string stamp = format_utc(t);
  stamp = stamp.substr(0, 4) + stamp.substr(5, 2) + stamp.substr(8, 5) + stamp.substr(14, 2) + stamp.substr(17, 2);
  char buf[96];
  std::snprintf(buf, sizeof buf, "S1%s_WV_SLC_%s_%03d", to_string(spec.satellite).c_str(), stamp.c_str(),
                spec.relative_orbit);
  return buf;
}

/// Leapfrog acquisition plan: `vignettes_per_pass` slots alternating beams
/// along the pass, repeated `repeat_count` times on the same ground track.
inline std::vector<PlannedVignette> synth_plan(const SimulationSpec& spec) {
  spec.validate();
  const CircularOrbit circle = circular_orbit_of(spec);
  std::vector<bool> render(spec.vignettes_per_pass, false);
  for (auto s : spec.render_slots) render[s] = true;

  std::vector<PlannedVignette> plan;
  for (std::size_t cycle = 0; cycle < spec.repeat_count; ++cycle) {
    const double days = double(cycle) * spec.repeat_interval_days;
    const UtcTime pass_start = add_seconds(spec.epoch, days * 86400.0);
    auto rng = stream_rng(spec.seed, 1, cycle);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t slot = 0; slot < spec.vignettes_per_pass; ++slot) {
      PlannedVignette v;
      v.cycle = cycle;
      v.slot = slot;
      v.days = days;
      v.rendered = render[slot];
      const Beam beam = leapfrog_beam(spec.first_beam, slot);
      const double jitter = spec.jitter_s * unit(rng);
      v.timing_error_ms = spec.timing_error_ms * unit(rng);
      v.range_error_m = spec.range_error_m * unit(rng);
      const double t_center = slot_time(spec, slot) + jitter;
      v.orbit = circle.sample(pass_start, std::floor(t_center / 10.0) * 10.0 - 60.0,
                              std::floor(t_center / 10.0) * 10.0 + 70.0);
      v.full_geometry = design_geometry(v.orbit, t_center, beam, full_lines(circle), full_samples(beam), spec.height);
      const std::size_t lines = std::min(spec.lines, v.full_geometry.n_lines);
      const std::size_t samples = std::min(spec.samples, v.full_geometry.n_samples);
      v.geometry = v.full_geometry.crop((v.full_geometry.n_lines - lines) / 2, (v.full_geometry.n_samples - samples) / 2,
                                        lines, samples);
      v.metadata = v.geometry;
      v.metadata.azimuth_start += v.timing_error_ms / 1000.0;
      v.metadata.near_range += v.range_error_m;

      RadarGeometry full_meta = v.full_geometry;
      full_meta.azimuth_start += v.timing_error_ms / 1000.0;
      full_meta.near_range += v.range_error_m;

      auto& r = v.record;
      r.sensing_start = add_seconds(pass_start, full_meta.azimuth_start);
      r.vignette_id = vignette_id(spec, beam, r.sensing_start, slot);
      r.granule_id = granule_id(spec, cycle);
      r.satellite = spec.satellite;
      r.relative_orbit = spec.relative_orbit;
      r.beam = beam;
      r.polarization = spec.polarization;
      const OrbitState s = v.orbit.state(t_center);
      const Geodetic nadir = ecef_to_geodetic(s.position);
      r.pass_direction = s.velocity.dot(enu_basis(nadir.lon_deg, nadir.lat_deg).north) >= 0 ? PassDirection::Ascending
                                                                                              : PassDirection::Descending;
      r.footprint = footprint_lonlat(full_meta, v.orbit, spec.height);
      if (v.rendered) {
        r.raster_uri = "slc/" + r.vignette_id + ".slc";
        r.geometry_uri = "slc/" + r.vignette_id + ".geom.json";
      }
      plan.push_back(std::move(v));
    }
  }
  return plan;
}

}  // namespace wvstack::sim
