#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wvstack/catalog/polygon.hpp"
#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/core/time.hpp"
#include "wvstack/geometry/ellipsoid.hpp"
#include "wvstack/geometry/sensor.hpp"

namespace wvstack {

enum class Satellite { A, B };
enum class PassDirection { Ascending, Descending };
enum class Polarization { VV, HH };

inline std::string to_string(Satellite s) { return s == Satellite::A ? "A" : "B"; }
inline std::string to_string(PassDirection p) { return p == PassDirection::Ascending ? "ascending" : "descending"; }
inline std::string to_string(Polarization p) { return p == Polarization::VV ? "VV" : "HH"; }

inline Satellite parse_satellite(std::string_view s) {
  if (s == "A") return Satellite::A;
  if (s == "B") return Satellite::B;
  throw Error(Errc::MalformedManifest, "unknown satellite '" + std::string(s) + "'");
}
inline PassDirection parse_pass(std::string_view s) {
  if (s == "ascending") return PassDirection::Ascending;
  if (s == "descending") return PassDirection::Descending;
  throw Error(Errc::MalformedManifest, "unknown pass_direction '" + std::string(s) + "'");
}
inline Polarization parse_polarization(std::string_view s) {
  if (s == "VV") return Polarization::VV;
  if (s == "HH") return Polarization::HH;
  throw Error(Errc::MalformedManifest, "unknown polarization '" + std::string(s) + "'");
}

struct VignetteRecord {
  std::string vignette_id;
  std::string granule_id;
  Satellite satellite = Satellite::A;
  int relative_orbit = 1;
  PassDirection pass_direction = PassDirection::Ascending;
  Beam beam = Beam::WV1;
  Polarization polarization = Polarization::VV;
  UtcTime sensing_start{};
  Ring footprint;
  std::string raster_uri;
  std::string geometry_uri;

  bool operator==(const VignetteRecord&) const = default;
};

inline constexpr double min_footprint_diagonal_m = 20e3;
inline constexpr double max_footprint_diagonal_m = 45e3;

/// Longest corner-to-corner distance of a quadrilateral footprint.
inline double footprint_diagonal_m(const Ring& f) {
  return std::max(haversine_m(f[0].lon, f[0].lat, f[2].lon, f[2].lat), haversine_m(f[1].lon, f[1].lat, f[3].lon, f[3].lat));
}

inline void validate_record(const VignetteRecord& r) {
  if (r.vignette_id.empty()) throw Error(Errc::MalformedManifest, "empty vignette_id");
  if (r.relative_orbit < 1 || r.relative_orbit > 175)
    throw Error(Errc::MalformedManifest, r.vignette_id + ": relative_orbit outside 1..175");
  if (r.footprint.size() != 4) throw Error(Errc::InvalidFootprint, r.vignette_id + ": footprint needs 4 corners");
  validate_ring(r.footprint, Errc::InvalidFootprint, r.vignette_id);
  if (lon_span(r.footprint) > 180.0) throw Error(Errc::InvalidFootprint, r.vignette_id + ": crosses the antimeridian");
  const double diag = footprint_diagonal_m(r.footprint);
  if (diag < min_footprint_diagonal_m || diag > max_footprint_diagonal_m)
    throw Error(Errc::InvalidFootprint, r.vignette_id + ": footprint diagonal " + std::to_string(diag / 1e3) +
                                            " km outside 20-45 km");
}

inline json record_to_json(const VignetteRecord& r) {
  return {{"vignette_id", r.vignette_id},
          {"granule_id", r.granule_id},
          {"satellite", to_string(r.satellite)},
          {"relative_orbit", r.relative_orbit},
          {"pass_direction", to_string(r.pass_direction)},
          {"beam", to_string(r.beam)},
          {"polarization", to_string(r.polarization)},
          {"sensing_start", format_utc(r.sensing_start)},
          {"footprint", ring_to_json(r.footprint)},
          {"raster_uri", r.raster_uri},
          {"geometry_uri", r.geometry_uri}};
}

inline VignetteRecord record_from_json(const json& j) {
  static const std::set<std::string> keys{"vignette_id",    "granule_id", "satellite",    "relative_orbit",
                                          "pass_direction", "beam",       "polarization", "sensing_start",
                                          "footprint",      "raster_uri", "geometry_uri"};
  if (!j.is_object()) throw Error(Errc::MalformedManifest, "vignette entry must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.count(k)) throw Error(Errc::MalformedManifest, "unknown vignette field '" + k + "'");
  VignetteRecord r;
  r.vignette_id = get_field<std::string>(j, "vignette_id");
  r.granule_id = get_field<std::string>(j, "granule_id");
  r.satellite = parse_satellite(get_field<std::string>(j, "satellite"));
  r.relative_orbit = get_field<int>(j, "relative_orbit");
  r.pass_direction = parse_pass(get_field<std::string>(j, "pass_direction"));
  r.beam = parse_beam(get_field<std::string>(j, "beam"));
  r.polarization = parse_polarization(get_field<std::string>(j, "polarization"));
  r.sensing_start = parse_utc(get_field<std::string>(j, "sensing_start"));
  r.footprint = ring_from_json(get_field<json>(j, "footprint"), "footprint");
  r.raster_uri = get_field<std::string>(j, "raster_uri");
  r.geometry_uri = get_field<std::string>(j, "geometry_uri");
  validate_record(r);
  return r;
}

/// One datatake's worth of vignettes as packaged by the archive.
struct GranuleManifest {
  static constexpr std::size_t nominal_min = 15;
  static constexpr std::size_t nominal_max = 160;

  std::string granule_id;
  Ring bounding_box;
  std::vector<VignetteRecord> vignettes;

  /// Member count outside the nominal 15..160 envelope.
  bool out_of_nominal_range() const { return vignettes.size() < nominal_min || vignettes.size() > nominal_max; }

  bool operator==(const GranuleManifest&) const = default;
};

/// Lon/lat rectangle enclosing every member footprint (empty for no members).
inline Ring bounding_box_of(const std::vector<VignetteRecord>& vs) {
  if (vs.empty()) return {};
  double lon0 = 1e9, lat0 = 1e9, lon1 = -1e9, lat1 = -1e9;
  for (const auto& v : vs)
    for (const auto& p : v.footprint) {
      lon0 = std::min(lon0, p.lon); lon1 = std::max(lon1, p.lon);
      lat0 = std::min(lat0, p.lat); lat1 = std::max(lat1, p.lat);
    }
  return box_ring(lon0, lat0, lon1, lat1);
}

inline GranuleManifest parse_manifest(std::string_view document) {
  const json j = parse_document(std::string(document));
  if (!j.is_object()) throw Error(Errc::MalformedManifest, "manifest must be a single object");
  for (const auto& [k, v] : j.items())
    if (k != "granule_id" && k != "bounding_box" && k != "vignettes")
      throw Error(Errc::MalformedManifest, "unknown manifest field '" + k + "'");
  GranuleManifest m;
  m.granule_id = get_field<std::string>(j, "granule_id");
  const json vs = get_field<json>(j, "vignettes");
  if (!vs.is_array()) throw Error(Errc::MalformedManifest, "vignettes must be an array");
  std::set<std::string> seen;
  for (const auto& v : vs) {
    m.vignettes.push_back(record_from_json(v));
    if (!seen.insert(m.vignettes.back().vignette_id).second)
      throw Error(Errc::MalformedManifest, "duplicate vignette_id " + m.vignettes.back().vignette_id);
  }
  if (j.contains("bounding_box")) {
    m.bounding_box = ring_from_json(j["bounding_box"], "bounding_box");
    validate_ring(m.bounding_box, Errc::InvalidFootprint, "bounding_box");
    const auto box = bgeo::to_polygon(m.bounding_box);
    for (const auto& v : m.vignettes)
      if (!boost::geometry::covered_by(bgeo::to_polygon(v.footprint), box))
        throw Error(Errc::InvalidFootprint, v.vignette_id + ": footprint outside granule bounding_box");
  } else {
    m.bounding_box = bounding_box_of(m.vignettes);
  }
  return m;
}

inline std::string serialize_manifest(const GranuleManifest& m) {
  json vs = json::array();
  for (const auto& v : m.vignettes) vs.push_back(record_to_json(v));
  json j = {{"granule_id", m.granule_id}, {"vignettes", vs}};
  if (!m.bounding_box.empty()) j["bounding_box"] = ring_to_json(m.bounding_box);
  return j.dump(2) + "\n";
}

}  // namespace wvstack
