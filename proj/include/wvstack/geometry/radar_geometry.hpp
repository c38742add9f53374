#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/geometry/orbit.hpp"
#include "wvstack/geometry/sensor.hpp"

namespace wvstack {

/// Per-vignette zero-Doppler imaging metadata. `azimuth_start` is in seconds
/// relative to the epoch of the vignette's OrbitModel.
struct RadarGeometry {
  double azimuth_start = 0;
  double azimuth_interval = 1.0 / sensor::prf;
  double prf = sensor::prf;
  double near_range = 0;
  double range_spacing = sensor::range_spacing(Beam::WV1);
  double wavelength = sensor::wavelength;
  std::size_t n_lines = 0;
  std::size_t n_samples = 0;
  Beam beam = Beam::WV1;

  double line_time(double line) const { return azimuth_start + line * azimuth_interval; }
  double sample_range(double sample) const { return near_range + sample * range_spacing; }
  double line_of(double t) const { return (t - azimuth_start) / azimuth_interval; }
  double sample_of(double range) const { return (range - near_range) / range_spacing; }
  double mid_time() const { return line_time(0.5 * static_cast<double>(n_lines)); }

  bool operator==(const RadarGeometry&) const = default;

  /// Sub-window starting at (line0, sample0).
  RadarGeometry crop(std::size_t line0, std::size_t sample0, std::size_t lines, std::size_t samples) const {
    if (line0 + lines > n_lines || sample0 + samples > n_samples)
      throw Error(Errc::InvalidGeometry, "crop exceeds raster extent");
    RadarGeometry g = *this;
    g.azimuth_start = line_time(static_cast<double>(line0));
    g.near_range = sample_range(static_cast<double>(sample0));
    g.n_lines = lines;
    g.n_samples = samples;
    return g;
  }

  void validate() const {
    auto bad = [](const std::string& m) { return Error(Errc::InvalidGeometry, m); };
    if (n_lines == 0 || n_samples == 0) throw bad("empty raster");
    if (std::abs(wavelength - sensor::wavelength) > 1e-9) throw bad("wavelength must be 0.055466 m");
    if (std::abs(prf - sensor::prf) > 0.1 * sensor::prf) throw bad("prf outside 1650 Hz +/- 10%");
    if (std::abs(azimuth_interval * prf - 1.0) > 1e-9) throw bad("azimuth_interval must equal 1/prf");
    const double nominal = sensor::range_spacing(beam);
    if (std::abs(range_spacing - nominal) > 0.01 * nominal) throw bad("range_spacing inconsistent with beam sampling rate");
    if (!(near_range > 0)) throw bad("near_range must be positive");
  }

  json to_json() const {
    return {{"azimuth_start", azimuth_start}, {"azimuth_interval", azimuth_interval},
            {"prf", prf},                     {"near_range", near_range},
            {"range_spacing", range_spacing}, {"wavelength", wavelength},
            {"n_lines", n_lines},             {"n_samples", n_samples},
            {"beam", to_string(beam)}};
  }

  static RadarGeometry from_json(const json& j) {
    RadarGeometry g;
    g.azimuth_start = get_field<double>(j, "azimuth_start");
    g.azimuth_interval = get_field<double>(j, "azimuth_interval");
    g.prf = get_field<double>(j, "prf");
    g.near_range = get_field<double>(j, "near_range");
    g.range_spacing = get_field<double>(j, "range_spacing");
    g.wavelength = get_field<double>(j, "wavelength");
    g.n_lines = get_field<std::size_t>(j, "n_lines");
    g.n_samples = get_field<std::size_t>(j, "n_samples");
    g.beam = parse_beam(get_field<std::string>(j, "beam"));
    g.validate();
    return g;
  }
};

/// Geometry + orbit sidecar, stored as one text document.
struct GeometrySidecar {
  RadarGeometry geometry;
  OrbitModel orbit;

  json to_json() const { return {{"radar_geometry", geometry.to_json()}, {"orbit", orbit.to_json()}}; }
  static GeometrySidecar from_json(const json& j) {
    return {RadarGeometry::from_json(get_field<json>(j, "radar_geometry")), OrbitModel::from_json(get_field<json>(j, "orbit"))};
  }
};

}  // namespace wvstack
