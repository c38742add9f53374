#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/core/time.hpp"
#include "wvstack/geometry/ellipsoid.hpp"

namespace wvstack {

struct StateVector {
  double t = 0;  // seconds since the orbit reference epoch
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct OrbitState {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
};

/// Time-ordered ECEF state vectors interpolated with piecewise cubic Hermite
/// polynomials. Times are relative to `epoch` to keep double precision at the
/// nanosecond level.
class OrbitModel {
 public:
  static constexpr double max_spacing = 30.0;

  OrbitModel() = default;
  OrbitModel(UtcTime epoch, std::vector<StateVector> svs) : epoch_(epoch), svs_(std::move(svs)) { validate(); }

  UtcTime epoch() const noexcept { return epoch_; }
  const std::vector<StateVector>& state_vectors() const noexcept { return svs_; }
  double start() const { return svs_.front().t; }
  double end() const { return svs_.back().t; }
  bool contains(double t) const { return t >= start() && t <= end(); }

  OrbitState state(double t) const {
    if (!(t >= start() && t <= end()))
      throw Error(Errc::TimeOutOfRange, "t=" + std::to_string(t) + " outside [" + std::to_string(start()) + ", " +
                                            std::to_string(end()) + "]");
    auto it = std::upper_bound(svs_.begin(), svs_.end(), t, [](double v, const StateVector& s) { return v < s.t; });
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - svs_.begin() - 1, 0));
    i = std::min(i, svs_.size() - 2);
    const StateVector& a = svs_[i];
    const StateVector& b = svs_[i + 1];
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;

    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    const double c00 = 12 * s - 6, c10 = 6 * s - 4, c01 = -12 * s + 6, c11 = 6 * s - 2;

    OrbitState out;
    out.position = h00 * a.position + h10 * h * a.velocity + h01 * b.position + h11 * h * b.velocity;
    out.velocity = (d00 * a.position + d10 * h * a.velocity + d01 * b.position + d11 * h * b.velocity) / h;
    out.acceleration = (c00 * a.position + c10 * h * a.velocity + c01 * b.position + c11 * h * b.velocity) / (h * h);
    // Knots are reproduced exactly, not just to rounding.
    if (s == 0.0) {
      out.position = a.position;
      out.velocity = a.velocity;
    } else if (s == 1.0) {
      out.position = b.position;
      out.velocity = b.velocity;
    }
    return out;
  }

  json to_json() const {
    json svs = json::array();
    for (const auto& s : svs_)
      svs.push_back({{"t", s.t},
                     {"position", {s.position[0], s.position[1], s.position[2]}},
                     {"velocity", {s.velocity[0], s.velocity[1], s.velocity[2]}}});
    return {{"epoch", format_utc(epoch_)}, {"state_vectors", svs}};
  }

  static OrbitModel from_json(const json& j) {
    std::vector<StateVector> svs;
    for (const auto& s : get_field<json>(j, "state_vectors")) {
      const auto p = get_field<std::vector<double>>(s, "position");
      const auto v = get_field<std::vector<double>>(s, "velocity");
      if (p.size() != 3 || v.size() != 3) throw Error(Errc::MalformedManifest, "state vector needs 3 components");
      svs.push_back({get_field<double>(s, "t"), Vec3(p[0], p[1], p[2]), Vec3(v[0], v[1], v[2])});
    }
    return OrbitModel(parse_utc(get_field<std::string>(j, "epoch")), std::move(svs));
  }

 private:
  void validate() const {
    if (svs_.size() < 4) throw Error(Errc::InvalidOrbit, "need at least 4 state vectors");
    for (std::size_t i = 1; i < svs_.size(); ++i) {
      const double dt = svs_[i].t - svs_[i - 1].t;
      if (!(dt > 0)) throw Error(Errc::InvalidOrbit, "state vector times must be strictly increasing");
      if (dt > max_spacing) throw Error(Errc::InvalidOrbit, "state vector spacing exceeds 30 s");
      const double va = svs_[i - 1].velocity.norm(), vb = svs_[i].velocity.norm();
      if (std::abs(va - vb) > 0.01 * std::max(va, vb))
        throw Error(Errc::InvalidOrbit, "neighbouring state vector speeds differ by more than 1%");
    }
  }

  UtcTime epoch_{};
  std::vector<StateVector> svs_;
};

}  // namespace wvstack
