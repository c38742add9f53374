#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/geometry.hpp>

#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"

namespace wvstack {

struct LonLat {
  double lon = 0;
  double lat = 0;
  bool operator==(const LonLat&) const = default;
};

/// Open ring of (lon, lat) vertices in degrees; orientation is free.
using Ring = std::vector<LonLat>;

namespace bgeo {
namespace bg = boost::geometry;
using Point = bg::model::d2::point_xy<double>;
using Polygon = bg::model::polygon<Point, false, true>;  // counter-clockwise, closed
using Box = bg::model::box<Point>;
using MultiPolygon = bg::model::multi_polygon<Polygon>;

inline Polygon to_polygon(const Ring& ring) {
  Polygon p;
  for (const auto& v : ring) bg::append(p.outer(), Point(v.lon, v.lat));
  if (!ring.empty()) bg::append(p.outer(), Point(ring.front().lon, ring.front().lat));
  bg::correct(p);
  return p;
}

inline Box envelope(const Polygon& p) { return bg::return_envelope<Box>(p); }

inline double intersection_area(const Polygon& a, const Polygon& b) {
  MultiPolygon out;
  bg::intersection(a, b, out);
  return bg::area(out);
}
}  // namespace bgeo

/// Longitude span of a ring; more than 180 degrees means it wraps the antimeridian.
inline double lon_span(const Ring& ring) {
  double lo = 1e9, hi = -1e9;
  for (const auto& v : ring) lo = std::min(lo, v.lon), hi = std::max(hi, v.lon);
  return hi - lo;
}

/// Rejects rings that are not simple polygons with positive area.
inline void validate_ring(const Ring& ring, Errc code, const std::string& what) {
  if (ring.size() < 3) throw Error(code, what + ": fewer than 3 vertices");
  for (const auto& v : ring)
    if (!std::isfinite(v.lon) || !std::isfinite(v.lat) || std::abs(v.lat) > 90.0 || std::abs(v.lon) > 180.0)
      throw Error(code, what + ": vertex out of range");
  const auto poly = bgeo::to_polygon(ring);
  std::string reason;
  if (!boost::geometry::is_valid(poly, reason)) throw Error(code, what + ": " + reason);
  if (!(boost::geometry::area(poly) > 0.0)) throw Error(code, what + ": degenerate polygon");
}

inline json ring_to_json(const Ring& ring) {
  json a = json::array();
  for (const auto& v : ring) a.push_back({v.lon, v.lat});
  return a;
}

inline Ring ring_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw Error(Errc::MalformedManifest, std::string(field) + " must be an array of [lon, lat] pairs");
  Ring ring;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(Errc::MalformedManifest, std::string(field) + " must be an array of [lon, lat] pairs");
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return ring;
}

/// Axis-aligned lon/lat rectangle as a ring.
inline Ring box_ring(double lon0, double lat0, double lon1, double lat1) {
  return {{lon0, lat0}, {lon1, lat0}, {lon1, lat1}, {lon0, lat1}};
}

}  // namespace wvstack
