#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wvstack/catalog/vignette.hpp"
#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/core/time.hpp"
#include "wvstack/geometry/sensor.hpp"

namespace wvstack::sim {

struct CoherenceRegion {
  double east = 0, north = 0;  // centre in the site frame, m
  double inner_radius = 0;     // annulus when > 0
  double outer_radius = 0;
  double coherence = 0;

  bool contains(double e, double n) const {
    const double r = std::hypot(e - east, n - north);
    return r >= inner_radius && r <= outer_radius;
  }
};

struct PointTarget {
  double east = 0, north = 0;
  double amplitude = 20;
};

/// Reflectivity of one repeat cycle replaced inside a disc.
struct ChangeBlob {
  std::size_t cycle = 0;
  double east = 0, north = 0, radius = 500;
  double gain = 4;  // amplitude factor of the replacement texture
};

struct DeformationModel {
  enum class Kind { None, Uniform, GaussianBowl };
  Kind kind = Kind::None;
  double rate_mm_per_year = 0;
  double east = 0, north = 0, radius = 2000;

  /// LOS displacement in mm at `days` after the first cycle, site-frame (e, n).
  double los_mm(double days, double e, double n) const {
    if (kind == Kind::None) return 0.0;
    double w = 1.0;
    if (kind == Kind::GaussianBowl) {
      const double r2 = (e - east) * (e - east) + (n - north) * (n - north);
      w = std::exp(-0.5 * r2 / (radius * radius));
    }
    return rate_mm_per_year * days / 365.25 * w;
  }
};

/// Everything needed to regenerate a synthetic dataset bit-for-bit.
struct SimulationSpec {
  std::uint64_t seed = 1;

  // orbit
  double altitude = 693000.0;
  double inclination_deg = 98.18;
  double ascending_node_lon_deg = 150.0;
  double start_u_deg = 207.3;  // argument of latitude at the first vignette centre
  UtcTime epoch = parse_utc("2023-01-05T06:00:00Z");

  // leapfrog plan
  double along_track_spacing_m = 100000.0;
  std::size_t vignettes_per_pass = 10;
  Beam first_beam = Beam::WV1;
  std::size_t repeat_count = 1;
  double repeat_interval_days = 12.0;
  int relative_orbit = 38;
  Satellite satellite = Satellite::A;
  Polarization polarization = Polarization::VV;
  double jitter_s = 0.05;  // spread of the true acquisition centre between cycles

  // rendering
  std::vector<std::size_t> render_slots{0};
  std::size_t lines = 2048;
  std::size_t samples = 2048;
  double truth_posting = 3.0;
  double texture_scale_m = 4.0;  // Gaussian sigma of the speckle correlation, m
  double height = 0.0;

  // scene
  double base_coherence = 1.0;
  std::vector<CoherenceRegion> regions;
  std::vector<PointTarget> point_targets;
  std::vector<ChangeBlob> changes;

  // injected metadata errors, uniform in [-max, max]
  double timing_error_ms = 0.0;
  double range_error_m = 0.0;

  DeformationModel deformation;
  std::optional<double> snr_db;  // empty: noise free

  void validate() const {
    auto bad = [](const std::string& m) { return Error(Errc::InvalidSpec, m); };
    if (!(altitude > 100e3 && altitude < 2000e3)) throw bad("altitude outside 100-2000 km");
    if (!(along_track_spacing_m > 0)) throw bad("along_track_spacing_m must be positive");
    if (vignettes_per_pass == 0 || repeat_count == 0) throw bad("plan needs at least one vignette and one cycle");
    if (!(repeat_interval_days > 0)) throw bad("repeat_interval_days must be positive");
    if (relative_orbit < 1 || relative_orbit > 175) throw bad("relative_orbit outside 1..175");
    if (timing_error_ms < 0 || timing_error_ms > 10.0) throw bad("timing_error_ms must be within 0..10");
    if (range_error_m < 0 || range_error_m > 50.0) throw bad("range_error_m must be within 0..50");
    if (!(jitter_s >= 0 && jitter_s <= 0.5)) throw bad("jitter_s must be within 0..0.5");
    if (lines < 256 || samples < 256) throw bad("rendered rasters must be at least 256 x 256");
    if (!(truth_posting > 0 && texture_scale_m >= truth_posting)) throw bad("texture_scale_m must be >= truth_posting > 0");
    for (auto s : render_slots)
      if (s >= vignettes_per_pass) throw bad("render slot " + std::to_string(s) + " is not in the plan");
    if (!(base_coherence >= 0 && base_coherence <= 1)) throw bad("base_coherence outside [0, 1]");
    for (const auto& r : regions)
      if (!(r.coherence >= 0 && r.coherence <= 1) || !(r.outer_radius > r.inner_radius))
        throw bad("invalid coherence region");
    for (const auto& c : changes)
      if (c.cycle >= repeat_count || !(c.radius > 0)) throw bad("invalid change blob");
  }

  json to_json() const;
  static SimulationSpec from_json(const json& j);
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::InvalidSpec, where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error(Errc::InvalidSpec, "unknown key '" + k + "' in " + where);
}

template <class T>
T spec_field(const json& j, const char* key, T fallback) {
  return get_field_or<T>(j, key, fallback, Errc::InvalidSpec);
}

inline std::string deformation_name(DeformationModel::Kind k) {
  switch (k) {
    case DeformationModel::Kind::Uniform: return "uniform";
    case DeformationModel::Kind::GaussianBowl: return "gaussian_bowl";
    default: return "none";
  }
}

}  // namespace detail

inline json SimulationSpec::to_json() const {
  json regions_j = json::array(), targets_j = json::array(), changes_j = json::array();
  for (const auto& r : regions)
    regions_j.push_back({{"east", r.east}, {"north", r.north}, {"inner_radius", r.inner_radius},
                         {"outer_radius", r.outer_radius}, {"coherence", r.coherence}});
  for (const auto& p : point_targets) targets_j.push_back({{"east", p.east}, {"north", p.north}, {"amplitude", p.amplitude}});
  for (const auto& c : changes)
    changes_j.push_back({{"cycle", c.cycle}, {"east", c.east}, {"north", c.north}, {"radius", c.radius}, {"gain", c.gain}});
  return {
      {"seed", seed},
      {"orbit",
       {{"altitude", altitude},
        {"inclination_deg", inclination_deg},
        {"ascending_node_lon_deg", ascending_node_lon_deg},
        {"start_u_deg", start_u_deg},
        {"epoch", format_utc(epoch)}}},
      {"plan",
       {{"along_track_spacing_m", along_track_spacing_m},
        {"vignettes_per_pass", vignettes_per_pass},
        {"first_beam", to_string(first_beam)},
        {"repeat_count", repeat_count},
        {"repeat_interval_days", repeat_interval_days},
        {"relative_orbit", relative_orbit},
        {"satellite", to_string(satellite)},
        {"polarization", to_string(polarization)},
        {"jitter_s", jitter_s}}},
      {"render",
       {{"slots", render_slots},
        {"lines", lines},
        {"samples", samples},
        {"truth_posting", truth_posting},
        {"texture_scale_m", texture_scale_m},
        {"height", height}}},
      {"scene",
       {{"base_coherence", base_coherence},
        {"regions", regions_j},
        {"point_targets", targets_j},
        {"changes", changes_j}}},
      {"errors", {{"timing_ms", timing_error_ms}, {"range_m", range_error_m}}},
      {"deformation",
       {{"model", detail::deformation_name(deformation.kind)},
        {"rate_mm_per_year", deformation.rate_mm_per_year},
        {"east", deformation.east},
        {"north", deformation.north},
        {"radius", deformation.radius}}},
      {"snr_db", snr_db ? json(*snr_db) : json(nullptr)},
  };
}

inline SimulationSpec SimulationSpec::from_json(const json& j) {
  using detail::spec_field;
  detail::reject_unknown(j, {"seed", "orbit", "plan", "render", "scene", "errors", "deformation", "snr_db"}, "spec");
  SimulationSpec s;
  try {
    s.seed = spec_field<std::uint64_t>(j, "seed", s.seed);
    if (j.contains("orbit")) {
      const auto& o = j["orbit"];
      detail::reject_unknown(o, {"altitude", "inclination_deg", "ascending_node_lon_deg", "start_u_deg", "epoch"}, "orbit");
      s.altitude = spec_field(o, "altitude", s.altitude);
      s.inclination_deg = spec_field(o, "inclination_deg", s.inclination_deg);
      s.ascending_node_lon_deg = spec_field(o, "ascending_node_lon_deg", s.ascending_node_lon_deg);
      s.start_u_deg = spec_field(o, "start_u_deg", s.start_u_deg);
      if (o.contains("epoch")) s.epoch = parse_utc(spec_field<std::string>(o, "epoch", ""));
    }
    if (j.contains("plan")) {
      const auto& p = j["plan"];
      detail::reject_unknown(p, {"along_track_spacing_m", "vignettes_per_pass", "first_beam", "repeat_count",
                                 "repeat_interval_days", "relative_orbit", "satellite", "polarization", "jitter_s"},
                             "plan");
      s.along_track_spacing_m = spec_field(p, "along_track_spacing_m", s.along_track_spacing_m);
      s.vignettes_per_pass = spec_field(p, "vignettes_per_pass", s.vignettes_per_pass);
      if (p.contains("first_beam")) s.first_beam = parse_beam(spec_field<std::string>(p, "first_beam", ""));
      s.repeat_count = spec_field(p, "repeat_count", s.repeat_count);
      s.repeat_interval_days = spec_field(p, "repeat_interval_days", s.repeat_interval_days);
      s.relative_orbit = spec_field(p, "relative_orbit", s.relative_orbit);
      if (p.contains("satellite")) s.satellite = parse_satellite(spec_field<std::string>(p, "satellite", ""));
      if (p.contains("polarization")) s.polarization = parse_polarization(spec_field<std::string>(p, "polarization", ""));
      s.jitter_s = spec_field(p, "jitter_s", s.jitter_s);
    }
    if (j.contains("render")) {
      const auto& r = j["render"];
      detail::reject_unknown(r, {"slots", "lines", "samples", "truth_posting", "texture_scale_m", "height"}, "render");
      s.render_slots = spec_field(r, "slots", s.render_slots);
      s.lines = spec_field(r, "lines", s.lines);
      s.samples = spec_field(r, "samples", s.samples);
      s.truth_posting = spec_field(r, "truth_posting", s.truth_posting);
      s.texture_scale_m = spec_field(r, "texture_scale_m", s.texture_scale_m);
      s.height = spec_field(r, "height", s.height);
    }
    if (j.contains("scene")) {
      const auto& sc = j["scene"];
      detail::reject_unknown(sc, {"base_coherence", "regions", "point_targets", "changes"}, "scene");
      s.base_coherence = spec_field(sc, "base_coherence", s.base_coherence);
      for (const auto& r : sc.value("regions", json::array())) {
        detail::reject_unknown(r, {"east", "north", "inner_radius", "outer_radius", "coherence"}, "region");
        s.regions.push_back({spec_field(r, "east", 0.0), spec_field(r, "north", 0.0), spec_field(r, "inner_radius", 0.0),
                             spec_field(r, "outer_radius", 0.0), spec_field(r, "coherence", 0.0)});
      }
      for (const auto& p : sc.value("point_targets", json::array())) {
        detail::reject_unknown(p, {"east", "north", "amplitude"}, "point target");
        s.point_targets.push_back({spec_field(p, "east", 0.0), spec_field(p, "north", 0.0), spec_field(p, "amplitude", 20.0)});
      }
      for (const auto& c : sc.value("changes", json::array())) {
        detail::reject_unknown(c, {"cycle", "east", "north", "radius", "gain"}, "change");
        s.changes.push_back({spec_field<std::size_t>(c, "cycle", 0), spec_field(c, "east", 0.0),
                             spec_field(c, "north", 0.0), spec_field(c, "radius", 500.0), spec_field(c, "gain", 4.0)});
      }
    }
    if (j.contains("errors")) {
      const auto& e = j["errors"];
      detail::reject_unknown(e, {"timing_ms", "range_m"}, "errors");
      s.timing_error_ms = spec_field(e, "timing_ms", s.timing_error_ms);
      s.range_error_m = spec_field(e, "range_m", s.range_error_m);
    }
    if (j.contains("deformation")) {
      const auto& d = j["deformation"];
      detail::reject_unknown(d, {"model", "rate_mm_per_year", "east", "north", "radius"}, "deformation");
      const auto model = spec_field<std::string>(d, "model", "none");
      if (model == "none") s.deformation.kind = DeformationModel::Kind::None;
      else if (model == "uniform") s.deformation.kind = DeformationModel::Kind::Uniform;
      else if (model == "gaussian_bowl") s.deformation.kind = DeformationModel::Kind::GaussianBowl;
      else throw Error(Errc::InvalidSpec, "unknown deformation model '" + model + "'");
      s.deformation.rate_mm_per_year = spec_field(d, "rate_mm_per_year", 0.0);
      s.deformation.east = spec_field(d, "east", 0.0);
      s.deformation.north = spec_field(d, "north", 0.0);
      s.deformation.radius = spec_field(d, "radius", 2000.0);
    }
    if (j.contains("snr_db") && !j["snr_db"].is_null()) s.snr_db = spec_field(j, "snr_db", 0.0);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidSpec) throw;
    throw Error(Errc::InvalidSpec, e.what());
  }
  s.validate();
  return s;
}

/// Independent generator for (seed, stream, substream).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream), std::uint32_t(stream >> 32),
                    std::uint32_t(sub), std::uint32_t(sub >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace wvstack::sim
