#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wvstack/core/time.hpp"
#include "wvstack/geometry/ellipsoid.hpp"
#include "wvstack/geometry/orbit.hpp"

namespace wvstack::sim {

inline constexpr double earth_gm = 3.986004418e14;

/// Circular orbit in the Earth-fixed frame (the synthetic world does not
/// rotate). Argument of latitude u = u0 + omega * t; u = 0 is the ascending node.
struct CircularOrbit {
  double altitude = 693000.0;
  double inclination_deg = 98.18;
  double ascending_node_lon_deg = 0.0;
  double u0_deg = 0.0;

  double radius() const { return wgs84::a + altitude; }
  double mean_motion() const { return std::sqrt(earth_gm / (radius() * radius() * radius())); }
  double speed() const { return radius() * mean_motion(); }

  Vec3 node_axis() const {
    const double l = deg2rad(ascending_node_lon_deg);
    return {std::cos(l), std::sin(l), 0.0};
  }
  /// In-plane axis 90 degrees past the ascending node.
  Vec3 apex_axis() const {
    const double i = deg2rad(inclination_deg);
    const Vec3 z(0, 0, 1);
    return std::cos(i) * z.cross(node_axis()) + std::sin(i) * z;
  }
  Vec3 normal() const { return node_axis().cross(apex_axis()); }

  double argument_of_latitude(double t) const { return deg2rad(u0_deg) + mean_motion() * t; }

  Vec3 position(double t) const {
    const double u = argument_of_latitude(t);
    return radius() * (std::cos(u) * node_axis() + std::sin(u) * apex_axis());
  }
  Vec3 velocity(double t) const {
    const double u = argument_of_latitude(t);
    return speed() * (-std::sin(u) * node_axis() + std::cos(u) * apex_axis());
  }

  /// Time (relative to u0) at which the argument of latitude equals u_deg.
  double time_of(double u_deg) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double du = std::fmod(deg2rad(u_deg - u0_deg), two_pi);
    if (du < 0) du += two_pi;
    return du / mean_motion();
  }

  OrbitModel sample(UtcTime epoch, double t_start, double t_end, double spacing = 10.0) const {
    std::vector<StateVector> svs;
    const int n = static_cast<int>(std::ceil((t_end - t_start) / spacing - 1e-9));
    for (int k = 0; k <= n; ++k) {
      const double t = t_start + k * spacing;
      svs.push_back({t, position(t), velocity(t)});
    }
    return OrbitModel(epoch, std::move(svs));
  }
};

}  // namespace wvstack::sim
