#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wvstack/catalog/vignette.hpp"
#include "wvstack/coregistration/measure.hpp"
#include "wvstack/coregistration/network.hpp"
#include "wvstack/coregistration/radar_offsets.hpp"
#include "wvstack/core/png.hpp"
#include "wvstack/geometry/geocode.hpp"
#include "wvstack/stack/manifest.hpp"

namespace wvstack {

/// A stack member with its payload locations resolved.
struct StackInput {
  VignetteRecord record;
  std::filesystem::path raster;
  std::filesystem::path geometry;
};

struct StackOptions {
  double posting = 2.5;
  WindowPlan window{};
  std::size_t pair_k = 3;
  double min_peak = 0.05;
  double aoi_margin_m = 250.0;
  double height = 0.0;
  bool keep_stage1 = true;
  bool remeasure = true;  // correlate the final rasters again for QA
  int jobs = 1;
  std::optional<std::string> reference;  // default: earliest member
};

struct StackResult {
  StackManifest manifest;
  std::vector<OffsetMeasurement> edges;           // stage-1 measurements
  std::vector<SceneOffset> offsets;               // applied corrections, member order
  std::vector<OffsetMeasurement> residual_edges;  // stage-3 re-measurement
  double max_residual_px = 0;
};

namespace detail {

inline bgeo::Polygon map_quad(const std::array<Eigen::Vector2d, 4>& corners) {
  Ring r;
  for (const auto& c : corners) r.push_back({c[0], c[1]});
  return bgeo::to_polygon(r);
}

/// Axis-aligned box inside `area`: the envelope shrunk about its centre until covered.
inline bgeo::Box inscribed_box(const bgeo::MultiPolygon& area) {
  namespace bg = boost::geometry;
  auto box = bg::return_envelope<bgeo::Box>(area);
  const double cx = 0.5 * (box.min_corner().x() + box.max_corner().x());
  const double cy = 0.5 * (box.min_corner().y() + box.max_corner().y());
  double hx = 0.5 * (box.max_corner().x() - box.min_corner().x());
  double hy = 0.5 * (box.max_corner().y() - box.min_corner().y());
  for (int i = 0; i < 200; ++i) {
    const bgeo::Box b({cx - hx, cy - hy}, {cx + hx, cy + hy});
    bgeo::Polygon p;
    bg::convert(b, p);
    if (bg::covered_by(p, area)) return b;
    hx *= 0.98, hy *= 0.98;
  }
  throw Error(Errc::InsufficientOverlap, "member footprints have no usable common area");
}

inline std::string stack_id_of(const VignetteRecord& ref) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%03d_%s_%s_", ref.relative_orbit, to_string(ref.beam).c_str(),
                ref.pass_direction == PassDirection::Ascending ? "A" : "D");
  return buf + ref.vignette_id;
}

inline void write_offset_plot(const std::filesystem::path& path, const std::vector<StackMemberEntry>& members) {
  if (members.empty()) return;
  const UtcTime t0 = members.front().sensing_start;
  double x1 = 1.0, y = 1.0;
  for (const auto& m : members) {
    x1 = std::max(x1, days_between(t0, m.sensing_start));
    y = std::max({y, std::abs(m.applied.dt_azimuth), std::abs(m.applied.d_range)});
  }
  PlotCanvas canvas(640, 400, -0.05 * x1, 1.05 * x1, -1.1 * y, 1.1 * y);
  for (const auto& m : members) {
    const double d = days_between(t0, m.sensing_start);
    canvas.marker(d, m.applied.dt_azimuth, Rgb{200, 40, 40}, 4);  // along-track, ms
    canvas.marker(d, m.applied.d_range, Rgb{40, 90, 200}, 2);     // slant range, m
  }
  write_png(path, canvas.image());
}

}  // namespace detail

/// Geocode, coregister through the offset network, correct the metadata and
/// geocode again onto one common grid. Outputs go to `stack_dir`:
///   manifest.json, members/<id>.{slc,mask,grid.json,geom.json},
///   stage1/<id>.* (unless dropped), qa/edges.csv, qa/scene_offsets.csv,
///   qa/residual_edges.csv, qa/offsets.png
inline StackResult generate_stack(std::vector<StackInput> members, const std::optional<Ring>& aoi,
                                  const std::filesystem::path& stack_dir, const StackOptions& opt = {}) {
  namespace fs = std::filesystem;
  if (members.size() < 2)
    throw Error(Errc::StackTooSmall, "stack needs at least 2 members, got " + std::to_string(members.size()));
  std::sort(members.begin(), members.end(), [](const StackInput& a, const StackInput& b) {
    return std::tie(a.record.sensing_start, a.record.vignette_id) < std::tie(b.record.sensing_start, b.record.vignette_id);
  });
  for (const auto& m : members) {
    const auto& r = m.record;
    const auto& f = members.front().record;
    if (r.relative_orbit != f.relative_orbit || r.beam != f.beam || r.pass_direction != f.pass_direction)
      throw Error(Errc::Usage, r.vignette_id + " does not share the stack's track, beam and pass");
  }
  std::size_t ref = 0;
  if (opt.reference) {
    auto it = std::find_if(members.begin(), members.end(), [&](const StackInput& m) { return m.record.vignette_id == *opt.reference; });
    if (it == members.end()) throw Error(Errc::MemberNotInStack, *opt.reference + " is not a stack member");
    ref = std::size_t(it - members.begin());
  }

  const std::size_t n = members.size();
  std::vector<GeometrySidecar> sidecars;
  for (const auto& m : members) sidecars.push_back(GeometrySidecar::from_json(read_document(m.geometry)));

  // Common map grid in a frame centred on the reference footprint.
  double lon = 0, lat = 0;
  for (const auto& p : members[ref].record.footprint) lon += p.lon, lat += p.lat;
  const LocalFrame frame(lon / 4.0, lat / 4.0);
  bgeo::Box box;
  if (aoi) {
    validate_ring(*aoi, Errc::InvalidPolygon, "aoi");
    Ring m;
    for (const auto& v : *aoi) {
      const auto en = frame.from_lonlat(v.lon, v.lat, opt.height);
      m.push_back({en[0], en[1]});
    }
    box = boost::geometry::return_envelope<bgeo::Box>(bgeo::to_polygon(m));
  } else {
    bgeo::MultiPolygon common;
    common.push_back(detail::map_quad(radar_footprint_on_map(sidecars[0].geometry, sidecars[0].orbit, frame, opt.height)));
    for (std::size_t i = 1; i < n; ++i) {
      bgeo::MultiPolygon next;
      boost::geometry::intersection(
          common, detail::map_quad(radar_footprint_on_map(sidecars[i].geometry, sidecars[i].orbit, frame, opt.height)), next);
      common = std::move(next);
    }
    if (boost::geometry::area(common) <= 0) throw Error(Errc::InsufficientOverlap, "member rasters do not overlap");
    box = detail::inscribed_box(common);
    box.min_corner().x(box.min_corner().x() + opt.aoi_margin_m);
    box.min_corner().y(box.min_corner().y() + opt.aoi_margin_m);
    box.max_corner().x(box.max_corner().x() - opt.aoi_margin_m);
    box.max_corner().y(box.max_corner().y() - opt.aoi_margin_m);
    if (box.max_corner().x() <= box.min_corner().x() || box.max_corner().y() <= box.min_corner().y())
      throw Error(Errc::InsufficientOverlap, "common footprint is smaller than the AOI margin");
  }
  const MapGrid grid = MapGrid::covering(frame, opt.posting, box.min_corner().x(), box.max_corner().x(),
                                         box.min_corner().y(), box.max_corner().y());

  GeocodeOptions gopt;
  gopt.height = opt.height;
  gopt.jobs = opt.jobs;

  // Step 1: independent geocoding with the archived metadata.
  std::vector<GeocodedRaster> stage1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = sidecars[i].geometry;
    const auto slc = read_complex_raster(members[i].raster, g.n_lines, g.n_samples);
    stage1[i] = geocode(slc, g, sidecars[i].orbit, grid, gopt);
    if (opt.keep_stage1) stage1[i].save(stack_dir / "stage1" / members[i].record.vignette_id);
  }

  // Step 2: pairwise bulk shifts, network inversion, conversion to radar time/range.
  std::vector<UtcTime> times;
  for (const auto& m : members) times.push_back(m.record.sensing_start);
  const auto pairs = select_pairs(times, opt.pair_k, ref);
  auto measure_all = [&](const std::vector<GeocodedRaster>& rasters) {
    std::vector<OffsetMeasurement> edges(pairs.size());
    WindowPlan wp = opt.window;
    wp.jobs = 1;
    parallel_for(pairs.size(), opt.jobs, [&](std::size_t k) {
      const auto [a, b] = pairs[k];
      try {
        edges[k] = measure_pair(rasters[a], rasters[b], wp);
      } catch (const Error& e) {
        if (e.code() != Errc::InsufficientOverlap && e.code() != Errc::AllWindowsRejected) throw;
        edges[k] = OffsetMeasurement{};  // unusable: zero peak
        edges[k].window_size = wp.size;
      }
      edges[k].scene_a = members[a].record.vignette_id;
      edges[k].scene_b = members[b].record.vignette_id;
    });
    return edges;
  };

  StackResult result;
  result.edges = measure_all(stage1);
  OffsetNetwork net;
  for (const auto& m : members) net.nodes.push_back(m.record.vignette_id);
  net.edges = result.edges;
  net.reference = members[ref].record.vignette_id;
  const auto solution = invert_network(net, opt.min_peak);

  double ce = 0, cn = 0;
  std::size_t used = 0;
  for (const auto& e : result.edges)
    if (e.peak_correlation >= opt.min_peak) ce += e.window_east, cn += e.window_north, ++used;
  if (used) ce /= double(used), cn /= double(used);
  const Vec3 centre = frame.to_ecef(ce, cn, opt.height);

  result.offsets = solution.scenes;
  for (std::size_t i = 0; i < n; ++i) {
    auto& o = result.offsets[i];
    if (i == ref) {
      o.d_east = o.d_north = 0.0;
      continue;
    }
    const auto& sc = sidecars[i];
    const auto r = offset_jacobian(sc.orbit, sc.geometry, frame, centre, opt.height).to_radar(o.d_east, o.d_north);
    o.dt_azimuth = r.dt_azimuth;
    o.d_range = r.d_range;
  }
  stage1.clear();
  stage1.shrink_to_fit();

  // Step 3: corrected metadata, geocode again.
  std::vector<GeocodedRaster> final_rasters(opt.remeasure ? n : 0);
  StackManifest& manifest = result.manifest;
  manifest.stack_id = detail::stack_id_of(members[ref].record);
  manifest.grid = grid;
  manifest.reference = members[ref].record.vignette_id;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = members[i].record.vignette_id;
    const RadarGeometry corrected = apply_offsets(sidecars[i].geometry, result.offsets[i]);
    const auto slc = read_complex_raster(members[i].raster, corrected.n_lines, corrected.n_samples);
    auto raster = geocode(slc, corrected, sidecars[i].orbit, grid, gopt);
    raster.save(stack_dir / "members" / id);
    write_document(stack_dir / "members" / (id + ".geom.json"), GeometrySidecar{corrected, sidecars[i].orbit}.to_json());
    manifest.members.push_back({id, members[i].record.sensing_start, "members/" + id, "members/" + id + ".geom.json",
                                result.offsets[i]});
    if (opt.remeasure) final_rasters[i] = std::move(raster);
  }
  if (opt.remeasure) {
    result.residual_edges = measure_all(final_rasters);
    for (const auto& e : result.residual_edges)
      if (e.peak_correlation >= opt.min_peak)
        result.max_residual_px = std::max(result.max_residual_px, std::hypot(e.d_east, e.d_north) / opt.posting);
  }

  manifest.save(stack_dir);
  write_edges_csv(stack_dir / "qa" / "edges.csv", result.edges);
  write_scene_offsets_csv(stack_dir / "qa" / "scene_offsets.csv", result.offsets);
  if (opt.remeasure) write_edges_csv(stack_dir / "qa" / "residual_edges.csv", result.residual_edges);
  detail::write_offset_plot(stack_dir / "qa" / "offsets.png", manifest.members);
  if (!opt.keep_stage1) fs::remove_all(stack_dir / "stage1");
  return result;
}

}  // namespace wvstack
