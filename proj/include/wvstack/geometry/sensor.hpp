#pragma once

#include <string>
#include <string_view>

#include "wvstack/core/error.hpp"

namespace wvstack {

enum class Beam { WV1, WV2 };

inline std::string to_string(Beam b) { return b == Beam::WV1 ? "WV1" : "WV2"; }

inline Beam parse_beam(std::string_view s) {
  if (s == "WV1") return Beam::WV1;
  if (s == "WV2") return Beam::WV2;
  throw Error(Errc::MalformedManifest, "unknown beam '" + std::string(s) + "'");
}

/// Sentinel-1 WV mode instrument constants.
namespace sensor {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double wavelength = 0.055466;
inline constexpr double prf = 1650.0;
inline constexpr double antenna_length = 12.3;

constexpr double range_sampling_rate(Beam b) { return b == Beam::WV1 ? 100.1e6 : 54.6e6; }
constexpr double range_bandwidth(Beam b) { return b == Beam::WV1 ? 74.5e6 : 48.2e6; }
constexpr double range_spacing(Beam b) { return speed_of_light / (2.0 * range_sampling_rate(b)); }

struct AngleRange {
  double min_deg;
  double max_deg;
  constexpr bool contains(double v) const { return v >= min_deg && v <= max_deg; }
};

/// Incidence envelope spanning minimum- and maximum-altitude rows.
constexpr AngleRange incidence_envelope(Beam b) {
  return b == Beam::WV1 ? AngleRange{21.68, 25.03} : AngleRange{34.88, 37.92};
}

/// Look-angle envelope spanning minimum- and maximum-altitude rows.
constexpr AngleRange look_envelope(Beam b) {
  return b == Beam::WV1 ? AngleRange{19.43, 22.40} : AngleRange{30.96, 33.62};
}

/// Nominal mid-swath incidence used by the synthetic acquisition model.
constexpr double nominal_incidence_deg(Beam b) { return b == Beam::WV1 ? 23.4 : 36.4; }

/// Displacement per radian of interferometric phase, lambda / (4 pi), in mm.
inline constexpr double mm_per_radian = wavelength * 1000.0 / (4.0 * 3.14159265358979323846);

}  // namespace sensor
}  // namespace wvstack
