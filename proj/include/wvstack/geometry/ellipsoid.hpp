#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace wvstack {

using Vec3 = Eigen::Vector3d;

namespace wgs84 {
inline constexpr double a = 6378137.0;
inline constexpr double f = 1.0 / 298.257223563;
inline constexpr double b = a * (1.0 - f);
inline constexpr double e2 = f * (2.0 - f);
}  // namespace wgs84

inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

struct Geodetic {
  double lon_deg = 0;
  double lat_deg = 0;
  double height = 0;
};

inline Vec3 geodetic_to_ecef(const Geodetic& g) {
  const double lon = deg2rad(g.lon_deg), lat = deg2rad(g.lat_deg);
  const double s = std::sin(lat), c = std::cos(lat);
  const double n = wgs84::a / std::sqrt(1.0 - wgs84::e2 * s * s);
  return {(n + g.height) * c * std::cos(lon), (n + g.height) * c * std::sin(lon),
          (n * (1.0 - wgs84::e2) + g.height) * s};
}

/// Iterative inversion; converges to sub-micrometre for near-surface points.
inline Geodetic ecef_to_geodetic(const Vec3& x) {
  const double p = std::hypot(x[0], x[1]);
  const double lon = std::atan2(x[1], x[0]);
  double lat = std::atan2(x[2], p * (1.0 - wgs84::e2));
  double h = 0;
  for (int i = 0; i < 8; ++i) {
    const double s = std::sin(lat);
    const double n = wgs84::a / std::sqrt(1.0 - wgs84::e2 * s * s);
    h = p / std::cos(lat) - n;
    lat = std::atan2(x[2], p * (1.0 - wgs84::e2 * n / (n + h)));
  }
  return {rad2deg(lon), rad2deg(lat), h};
}

/// Local east/north/up unit vectors at a geodetic position.
struct EnuBasis {
  Vec3 east, north, up;
};

inline EnuBasis enu_basis(double lon_deg, double lat_deg) {
  const double lon = deg2rad(lon_deg), lat = deg2rad(lat_deg);
  const double sl = std::sin(lon), cl = std::cos(lon), sp = std::sin(lat), cp = std::cos(lat);
  return {Vec3(-sl, cl, 0.0), Vec3(-sp * cl, -sp * sl, cp), Vec3(cp * cl, cp * sl, sp)};
}

/// Value of the implicit surface (x/A)^2 + (y/A)^2 + (z/B)^2 - 1 for the
/// ellipsoid inflated by `height` (A = a + h, B = b + h).
inline double inflated_ellipsoid(const Vec3& x, double height) {
  const double aa = wgs84::a + height, bb = wgs84::b + height;
  return (x[0] * x[0] + x[1] * x[1]) / (aa * aa) + x[2] * x[2] / (bb * bb) - 1.0;
}

/// Great-circle distance on the mean sphere, metres.
inline double haversine_m(double lon1, double lat1, double lon2, double lat2) {
  constexpr double r = 6371008.8;
  const double p1 = deg2rad(lat1), p2 = deg2rad(lat2);
  const double dp = p2 - p1, dl = deg2rad(lon2 - lon1);
  const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * r * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace wvstack
