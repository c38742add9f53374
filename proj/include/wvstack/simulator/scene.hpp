#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "wvstack/core/parallel.hpp"
#include "wvstack/geometry/geocode.hpp"
#include "wvstack/geometry/interpolation.hpp"
#include "wvstack/geometry/map_grid.hpp"
#include "wvstack/simulator/plan.hpp"

namespace wvstack::sim {

/// Ground truth shared by every epoch of one plan slot: a local frame and a
/// unit-power complex reflectivity on a fine map grid.
struct SiteScene {
  std::size_t slot = 0;
  LocalFrame frame;
  MapGrid truth_grid;
  Raster<cfloat> common;

  json to_json() const { return {{"slot", slot}, {"truth_grid", truth_grid.to_json()}}; }
};

/// Circular complex Gaussian field smoothed by a Gaussian of `sigma_cells`,
/// scaled to unit mean power.
inline Raster<cfloat> smoothed_texture(std::size_t rows, std::size_t cols, double sigma_cells, std::mt19937_64& rng) {
  Raster<cfloat> field(rows, cols);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (auto& v : field.values()) {
    const float re = g(rng);
    v = {re, g(rng)};
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_cells));
  std::vector<float> k(std::size_t(2 * radius + 1));
  float ksum = 0.0f;
  for (int i = -radius; i <= radius; ++i) ksum += k[std::size_t(i + radius)] = float(std::exp(-0.5 * i * i / (sigma_cells * sigma_cells)));
  for (auto& w : k) w /= ksum;

  auto clamp_index = [](long i, std::size_t n) { return std::size_t(std::clamp<long>(i, 0, long(n) - 1)); };
  std::vector<cfloat> line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.assign(field.row(r).begin(), field.row(r).end());
    for (std::size_t c = 0; c < cols; ++c) {
      cfloat acc{};
      for (int i = -radius; i <= radius; ++i) acc += k[std::size_t(i + radius)] * line[clamp_index(long(c) + i, cols)];
      field(r, c) = acc;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    line.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) line[r] = field(r, c);
    for (std::size_t r = 0; r < rows; ++r) {
      cfloat acc{};
      for (int i = -radius; i <= radius; ++i) acc += k[std::size_t(i + radius)] * line[clamp_index(long(r) + i, rows)];
      field(r, c) = acc;
    }
  }
  double power = 0.0;
  for (const auto& v : field.values()) power += std::norm(v);
  const float scale = float(1.0 / std::sqrt(power / double(field.size())));
  for (auto& v : field.values()) v *= scale;
  return field;
}

/// Map-plane position of every pixel of `geom`, from a tie grid every `step`
/// pixels with bilinear interpolation.
class TieGrid {
 public:
  TieGrid(const RadarGeometry& geom, const OrbitModel& orbit, const LocalFrame& frame, double height, std::size_t step = 16)
      : step_(step) {
    auto knots = [&](std::size_t n) {
      std::vector<double> k;
      for (std::size_t i = 0; i + 1 < n; i += step) k.push_back(double(i));
      k.push_back(double(n) - 1.0);
      return k;
    };
    lines_ = knots(geom.n_lines);
    samples_ = knots(geom.n_samples);
    en_.resize(lines_.size() * samples_.size());
    for (std::size_t i = 0; i < lines_.size(); ++i)
      for (std::size_t j = 0; j < samples_.size(); ++j)
        en_[i * samples_.size() + j] = frame.to_map(radar_to_ground(geom, orbit, lines_[i], samples_[j], height));
  }

  Eigen::Vector2d operator()(double line, double sample) const {
    const std::size_t i = std::min(std::size_t(line) / step_, lines_.size() - 2);
    const std::size_t j = std::min(std::size_t(sample) / step_, samples_.size() - 2);
    const double u = (line - lines_[i]) / (lines_[i + 1] - lines_[i]);
    const double v = (sample - samples_[j]) / (samples_[j + 1] - samples_[j]);
    const std::size_t w = samples_.size();
    return (1 - u) * ((1 - v) * en_[i * w + j] + v * en_[i * w + j + 1]) +
           u * ((1 - v) * en_[(i + 1) * w + j] + v * en_[(i + 1) * w + j + 1]);
  }

 private:
  std::size_t step_;
  std::vector<double> lines_, samples_;
  std::vector<Eigen::Vector2d> en_;
};

/// Builds the site truth for all planned members of one slot.
inline SiteScene build_site(const SimulationSpec& spec, const std::vector<const PlannedVignette*>& members) {
  if (members.empty()) throw Error(Errc::InvalidSpec, "site has no members");
  SiteScene site;
  site.slot = members.front()->slot;
  const auto& g0 = members.front()->geometry;
  const Geodetic centre = ecef_to_geodetic(radar_to_ground(g0, members.front()->orbit, 0.5 * double(g0.n_lines),
                                                           0.5 * double(g0.n_samples), spec.height));
  site.frame = LocalFrame(centre.lon_deg, centre.lat_deg);

  double e0 = 1e30, e1 = -1e30, n0 = 1e30, n1 = -1e30;
  for (const auto* m : members)
    for (const auto& p : radar_footprint_on_map(m->geometry, m->orbit, site.frame, spec.height)) {
      e0 = std::min(e0, p[0]); e1 = std::max(e1, p[0]);
      n0 = std::min(n0, p[1]); n1 = std::max(n1, p[1]);
    }
  const double margin = 200.0;
  site.truth_grid = MapGrid::covering(site.frame, spec.truth_posting, e0 - margin, e1 + margin, n0 - margin, n1 + margin);
  auto rng = stream_rng(spec.seed, 2, site.slot);
  site.common = smoothed_texture(site.truth_grid.n_north, site.truth_grid.n_east,
                                 spec.texture_scale_m / spec.truth_posting, rng);
  return site;
}

inline double site_coherence(const SimulationSpec& spec, double e, double n) {
  double rho = spec.base_coherence;
  for (const auto& r : spec.regions)
    if (r.contains(e, n)) rho = r.coherence;
  return rho;
}

/// Interferometric phase of a LOS displacement, radians.
inline double deformation_phase(double los_mm) { return 4.0 * std::numbers::pi * los_mm * 1e-3 / sensor::wavelength; }

/// Renders one epoch in radar coordinates under its TRUE geometry.
inline Raster<cfloat> synth_slc(const SimulationSpec& spec, const SiteScene& site, const PlannedVignette& v, int jobs = 1) {
  const auto& grid = site.truth_grid;
  const std::uint64_t epoch_key = v.slot * 100000 + v.cycle;

  // Epoch reflectivity on the truth grid.
  std::vector<const ChangeBlob*> blobs;
  for (const auto& c : spec.changes)
    if (c.cycle == v.cycle) blobs.push_back(&c);
  bool partial = spec.base_coherence < 1.0 || !blobs.empty();
  for (const auto& r : spec.regions) partial = partial || r.coherence < 1.0;
  Raster<cfloat> own;
  if (partial) {
    auto rng = stream_rng(spec.seed, 3, epoch_key);
    own = smoothed_texture(grid.n_north, grid.n_east, spec.texture_scale_m / spec.truth_posting, rng);
    parallel_for(grid.n_north, jobs, [&](std::size_t r) {
      const double n = grid.north(double(r));
      for (std::size_t c = 0; c < grid.n_east; ++c) {
        const double e = grid.east(double(c));
        bool changed = false;
        for (const auto* b : blobs)
          if (std::hypot(e - b->east, n - b->north) <= b->radius) {
            own(r, c) *= float(b->gain);
            changed = true;
          }
        if (changed) continue;
        const double rho = site_coherence(spec, e, n);
        own(r, c) = float(std::sqrt(rho)) * site.common(r, c) + float(std::sqrt(1.0 - rho)) * own(r, c);
      }
    });
  }
  const Raster<cfloat>& field = partial ? own : site.common;

  const auto& g = v.geometry;
  const TieGrid tie(g, v.orbit, site.frame, spec.height);
  Raster<cfloat> slc(g.n_lines, g.n_samples);
  const auto& kernel = SincKernel::standard();
  parallel_for(g.n_lines, jobs, [&](std::size_t l) {
    for (std::size_t s = 0; s < g.n_samples; ++s) {
      const auto en = tie(double(l), double(s));
      const auto z = sinc_sample(field, grid.row_of(en[1]), grid.col_of(en[0]), kernel);
      const double phase = deformation_phase(spec.deformation.los_mm(v.days, en[0], en[1]));
      const auto out = z * std::polar(1.0, phase);
      slc(l, s) = cfloat(float(out.real()), float(out.imag()));
    }
  });

  // Point targets: separable band-limited impulse, Hann-tapered to +-16 px.
  constexpr int reach = 16;
  for (const auto& p : spec.point_targets) {
    const Vec3 x = site.frame.to_ecef(p.east, p.north, spec.height);
    const auto rc = ground_to_radar(g, v.orbit, x, g.mid_time());
    const double phase = deformation_phase(spec.deformation.los_mm(v.days, p.east, p.north));
    const auto amp = std::polar(p.amplitude, phase);
    auto tap = [](double d) {
      if (std::abs(d) >= reach) return 0.0;
      const double sinc = d == 0.0 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
      return sinc * 0.5 * (1.0 + std::cos(std::numbers::pi * d / reach));
    };
    const long l0 = std::lround(rc.line), s0 = std::lround(rc.sample);
    for (long l = l0 - reach; l <= l0 + reach; ++l)
      for (long s = s0 - reach; s <= s0 + reach; ++s) {
        if (l < 0 || s < 0 || l >= long(g.n_lines) || s >= long(g.n_samples)) continue;
        const auto add = amp * tap(double(l) - rc.line) * tap(double(s) - rc.sample);
        slc(std::size_t(l), std::size_t(s)) += cfloat(float(add.real()), float(add.imag()));
      }
  }

  if (spec.snr_db) {
    auto rng = stream_rng(spec.seed, 4, epoch_key);
    std::normal_distribution<float> noise(0.0f, float(std::sqrt(0.5 * std::pow(10.0, -*spec.snr_db / 10.0))));
    for (auto& z : slc.values()) {
      const float re = noise(rng);
      z += cfloat(re, noise(rng));
    }
  }
  return slc;
}

}  // namespace wvstack::sim
