#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>

#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/core/raster.hpp"
#include "wvstack/geometry/ellipsoid.hpp"

namespace wvstack {

/// Local orthographic tangent-plane frame. Map coordinates (east, north) are
/// the projection of a surface point onto the tangent plane at the origin;
/// the inverse drops back onto the (height-inflated) ellipsoid along the
/// origin's vertical. Scale error is below 1e-6 within 20 km of the origin.
class LocalFrame {
 public:
  LocalFrame() : LocalFrame(0.0, 0.0) {}
  LocalFrame(double origin_lon_deg, double origin_lat_deg)
      : lon_(origin_lon_deg), lat_(origin_lat_deg),
        origin_(geodetic_to_ecef({origin_lon_deg, origin_lat_deg, 0.0})),
        basis_(enu_basis(origin_lon_deg, origin_lat_deg)) {}

  double origin_lon() const { return lon_; }
  double origin_lat() const { return lat_; }
  const EnuBasis& basis() const { return basis_; }

  Vec3 to_ecef(double east, double north, double height = 0.0) const {
    const Vec3 q = origin_ + east * basis_.east + north * basis_.north;
    const double aa = wgs84::a + height, bb = wgs84::b + height;
    const Vec3 w(1.0 / (aa * aa), 1.0 / (aa * aa), 1.0 / (bb * bb));
    const Vec3& u = basis_.up;
    const double alpha = (u.array() * u.array() * w.array()).sum();
    const double beta = (q.array() * u.array() * w.array()).sum();
    const double gamma = (q.array() * q.array() * w.array()).sum() - 1.0;
    const double t = -gamma / (beta + std::sqrt(beta * beta - alpha * gamma));
    return q + t * u;
  }

  /// (east, north) of an ECEF point.
  Eigen::Vector2d to_map(const Vec3& x) const {
    const Vec3 d = x - origin_;
    return {d.dot(basis_.east), d.dot(basis_.north)};
  }

  Eigen::Vector2d from_lonlat(double lon_deg, double lat_deg, double height = 0.0) const {
    return to_map(geodetic_to_ecef({lon_deg, lat_deg, height}));
  }

  Geodetic to_lonlat(double east, double north, double height = 0.0) const {
    return ecef_to_geodetic(to_ecef(east, north, height));
  }

  bool operator==(const LocalFrame& o) const { return lon_ == o.lon_ && lat_ == o.lat_; }

 private:
  double lon_, lat_;
  Vec3 origin_;
  EnuBasis basis_;
};

/// Regular north-up grid. Cell (row, col) is centred at
/// (east0 + col * posting, north0 - row * posting).
struct MapGrid {
  LocalFrame frame;
  double posting = 2.5;
  double east0 = 0;
  double north0 = 0;
  std::size_t n_east = 0;
  std::size_t n_north = 0;

  double east(double col) const { return east0 + col * posting; }
  double north(double row) const { return north0 - row * posting; }
  double col_of(double e) const { return (e - east0) / posting; }
  double row_of(double n) const { return (north0 - n) / posting; }
  std::size_t cells() const { return n_east * n_north; }

  bool operator==(const MapGrid&) const = default;

  /// Grid whose cells tile [e_min, e_max] x [n_min, n_max], snapped outward
  /// to multiples of `posting`.
  static MapGrid covering(const LocalFrame& frame, double posting, double e_min, double e_max, double n_min,
                          double n_max) {
    if (!(posting > 0)) throw Error(Errc::InvalidGeometry, "posting must be positive");
    MapGrid g;
    g.frame = frame;
    g.posting = posting;
    const double c0 = std::ceil(e_min / posting - 1e-9), c1 = std::floor(e_max / posting + 1e-9);
    const double r0 = std::floor(n_max / posting + 1e-9), r1 = std::ceil(n_min / posting - 1e-9);
    if (c1 < c0 || r0 < r1) throw Error(Errc::InvalidGeometry, "empty grid extent");
    g.east0 = c0 * posting;
    g.north0 = r0 * posting;
    g.n_east = static_cast<std::size_t>(c1 - c0) + 1;
    g.n_north = static_cast<std::size_t>(r0 - r1) + 1;
    return g;
  }

  json to_json() const {
    return {{"projection", "local-orthographic-tangent-plane"},
            {"origin_lon", frame.origin_lon()},
            {"origin_lat", frame.origin_lat()},
            {"posting", posting},
            {"east0", east0},
            {"north0", north0},
            {"n_east", n_east},
            {"n_north", n_north}};
  }

  static MapGrid from_json(const json& j) {
    MapGrid g;
    g.frame = LocalFrame(get_field<double>(j, "origin_lon"), get_field<double>(j, "origin_lat"));
    g.posting = get_field<double>(j, "posting");
    g.east0 = get_field<double>(j, "east0");
    g.north0 = get_field<double>(j, "north0");
    g.n_east = get_field<std::size_t>(j, "n_east");
    g.n_north = get_field<std::size_t>(j, "n_north");
    if (!(g.posting > 0)) throw Error(Errc::InvalidGeometry, "posting must be positive");
    return g;
  }
};

/// Complex raster on a map grid (north-major: row 0 is the northern edge).
struct GeocodedRaster {
  MapGrid grid;
  Raster<cfloat> samples;
  Mask mask;

  GeocodedRaster() = default;
  explicit GeocodedRaster(const MapGrid& g)
      : grid(g), samples(g.n_north, g.n_east), mask(g.n_north, g.n_east, 0) {}

  bool valid(std::size_t r, std::size_t c) const { return mask(r, c) != 0; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : mask.values()) n += v != 0;
    return n;
  }

  /// Writes `<stem>.slc`, `<stem>.mask` and `<stem>.grid.json`.
  void save(const std::filesystem::path& stem) const {
    write_complex_raster(stem.string() + ".slc", samples);
    write_mask(stem.string() + ".mask", mask);
    write_document(stem.string() + ".grid.json", grid.to_json());
  }

  static GeocodedRaster load(const std::filesystem::path& stem) {
    GeocodedRaster r;
    r.grid = MapGrid::from_json(read_document(stem.string() + ".grid.json"));
    r.samples = read_complex_raster(stem.string() + ".slc", r.grid.n_north, r.grid.n_east);
    r.mask = read_mask(stem.string() + ".mask", r.grid.n_north, r.grid.n_east);
    return r;
  }
};

}  // namespace wvstack
