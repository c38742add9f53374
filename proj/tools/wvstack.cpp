// wvstack command-line entry point.
//
//   wvstack <subcommand> [--config FILE] [--workspace DIR] [--jobs N] [--seed N] ...
//
// Every subcommand writes its artifacts under the workspace and a run report
// to <workspace>/reports/<subcommand>.json.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wvstack/catalog/index.hpp"
#include "wvstack/cli/config.hpp"
#include "wvstack/insar/workflow.hpp"
#include "wvstack/simulator/dataset.hpp"
#include "wvstack/stack/composite.hpp"
#include "wvstack/stack/generate.hpp"

namespace fs = std::filesystem;
using namespace wvstack;

namespace {

struct Run {
  RunConfig cfg;
  fs::path ws;
  std::string command;
  std::vector<std::string> argv;
  json results = json::object();
  std::vector<std::string> artifacts;

  fs::path index_path() const { return ws / "index.json"; }

  void artifact(const fs::path& p) { artifacts.push_back(p.lexically_relative(ws).generic_string()); }

  void write_report() const {
    json doc{{"command", command}, {"argv", argv}, {"config", cfg.to_json()}, {"results", results}, {"artifacts", artifacts}};
    write_document(ws / "reports" / (command + ".json"), doc);
  }
};

// ---------------------------------------------------------------- arguments

Ring parse_aoi(const std::string& box, const std::string& file) {
  if (!box.empty() && !file.empty()) throw Error(Errc::Usage, "give --aoi or --aoi-file, not both");
  if (!file.empty()) {
    const json j = read_document(file, Errc::Usage);
    return ring_from_json(j.is_object() ? get_field<json>(j, "polygon", Errc::Usage) : j, "aoi");
  }
  if (box.empty()) return box_ring(-180.0, -90.0, 180.0, 90.0);
  std::vector<double> v;
  std::stringstream ss(box);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      v.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw Error(Errc::Usage, "--aoi expects lon0,lat0,lon1,lat1");
    }
  }
  if (v.size() != 4) throw Error(Errc::Usage, "--aoi expects lon0,lat0,lon1,lat1");
  return box_ring(v[0], v[1], v[2], v[3]);
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');)
    if (!part.empty()) out.push_back(part);
  return out;
}

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(Errc::Usage, e.what());
  }
}

VignetteIndex load_index(const Run& run) {
  if (!fs::exists(run.index_path())) throw Error(Errc::Usage, "no index in the workspace; run `wvstack index` first");
  return VignetteIndex::load(run.index_path());
}

const VignetteRecord& require_record(const VignetteIndex& idx, const std::string& id) {
  const auto* r = idx.find(id);
  if (!r) throw Error(Errc::Usage, "vignette " + id + " is not in the index");
  if (r->raster_uri.empty() || r->geometry_uri.empty()) throw Error(Errc::MissingField, id + " has no raster payload");
  return *r;
}

StackInput stack_input(const Run& run, const VignetteRecord& r) {
  return {r, run.ws / r.raster_uri, run.ws / r.geometry_uri};
}

void print_offsets(const std::vector<SceneOffset>& offsets) {
  std::printf("%-34s %10s %9s %9s %9s %8s\n", "scene", "dt_ms", "dr_m", "de_m", "dn_m", "resid_m");
  for (const auto& o : offsets)
    std::printf("%-34s %10.4f %9.3f %9.3f %9.3f %8.4f%s\n", o.scene.c_str(), o.dt_azimuth, o.d_range, o.d_east, o.d_north,
                o.residual, o.flagged() ? "  FLAGGED" : "");
}

json offsets_json(const std::vector<SceneOffset>& offsets) {
  json a = json::array();
  for (const auto& o : offsets)
    a.push_back({{"scene", o.scene},
                  {"dt_azimuth_ms", o.dt_azimuth},
                  {"d_range_m", o.d_range},
                  {"d_east_m", o.d_east},
                  {"d_north_m", o.d_north},
                  {"residual_m", o.residual},
                  {"flagged", o.flagged()}});
  return a;
}

// ---------------------------------------------------------------- commands

struct SimulateArgs {
  std::string spec, out;
};

void cmd_simulate(Run& run, const SimulateArgs& a, bool seed_given) {
  auto spec = sim::SimulationSpec::from_json(read_document(a.spec, Errc::InvalidSpec));
  if (seed_given) spec.seed = run.cfg.seed;
  run.cfg.seed = spec.seed;
  const fs::path out = a.out.empty() ? run.ws / "dataset" : fs::path(a.out);
  const auto summary = sim::write_dataset(spec, out, run.cfg.jobs);
  std::printf("simulated %zu vignettes (%zu rendered) in %zu granules -> %s\n", summary.planned, summary.rendered,
              summary.manifests.size(), out.string().c_str());
  run.results = {{"seed", spec.seed}, {"planned", summary.planned}, {"rendered", summary.rendered},
                 {"granules", summary.manifests.size()}, {"dataset", out.lexically_relative(run.ws).generic_string()}};
  for (const auto& m : summary.manifests) run.artifact(m);
  run.artifact(out / "truth.csv");
}

struct IndexArgs {
  std::vector<std::string> inputs;
  std::string root;
  bool append = false;
};

void cmd_index(Run& run, const IndexArgs& a) {
  std::vector<std::pair<fs::path, fs::path>> manifests;  // (file, root)
  auto add_input = [&](const fs::path& p, const std::optional<fs::path>& root) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw Error(Errc::Usage, "no such manifest or directory: " + p.string());
    }
    for (const auto& f : files) manifests.emplace_back(f, root ? *root : f.parent_path());
  };
  if (a.inputs.empty()) {
    add_input(run.ws / "dataset" / "manifests", a.root.empty() ? run.ws / "dataset" : fs::path(a.root));
  } else {
    for (const auto& i : a.inputs) add_input(i, a.root.empty() ? std::nullopt : std::optional<fs::path>(a.root));
  }

  VignetteIndex idx;
  if (a.append && fs::exists(run.index_path())) idx = VignetteIndex::load(run.index_path());
  const fs::path ws_abs = fs::absolute(run.ws).lexically_normal();
  std::size_t added = 0, duplicates = 0;
  json warnings = json::array();
  for (const auto& [file, root] : manifests) {
    auto m = parse_manifest(read_text(file));
    if (m.out_of_nominal_range()) {
      const std::string w = file.filename().string() + ": " + std::to_string(m.vignettes.size()) +
                            " vignettes is outside the nominal 15-160 per granule";
      std::fprintf(stderr, "warning: %s\n", w.c_str());
      warnings.push_back(w);
    }
    for (auto& r : m.vignettes) {
      for (auto* uri : {&r.raster_uri, &r.geometry_uri})
        if (!uri->empty())
          *uri = (fs::absolute(root) / *uri).lexically_normal().lexically_relative(ws_abs).generic_string();
      if (idx.insert(r))
        ++added;
      else
        ++duplicates;
    }
  }
  idx.save(run.index_path());
  std::printf("indexed %zu vignettes from %zu manifests (%zu duplicates skipped), %zu total\n", added, manifests.size(),
              duplicates, idx.size());
  run.results = {{"manifests", manifests.size()}, {"added", added}, {"duplicates", duplicates},
                 {"total", idx.size()}, {"warnings", warnings}};
  run.artifact(run.index_path());
}

struct QueryArgs {
  std::string aoi, aoi_file, start, end, beam, pass;
  int orbit = 0;
};

void cmd_query(Run& run, const QueryArgs& a) {
  const auto idx = load_index(run);
  const Ring aoi = parse_aoi(a.aoi, a.aoi_file);
  TimeInterval interval;
  QueryFilters filters;
  as_usage([&] {
    if (!a.start.empty()) interval.start = parse_utc(a.start);
    if (!a.end.empty()) interval.end = parse_utc(a.end);
    if (!a.beam.empty()) filters.beam = parse_beam(a.beam);
    if (!a.pass.empty()) filters.pass_direction = parse_pass(a.pass);
    return 0;
  });
  if (a.orbit != 0) filters.relative_orbit = a.orbit;
  const auto hits = idx.query(aoi, interval, filters);
  json ids = json::array();
  for (const auto& r : hits) {
    std::printf("%s  %s  %s  orbit %d  %s\n", r.vignette_id.c_str(), format_utc(r.sensing_start).c_str(),
                to_string(r.beam).c_str(), r.relative_orbit, to_string(r.pass_direction).c_str());
    ids.push_back(r.vignette_id);
  }
  std::printf("%zu vignettes\n", hits.size());
  write_document(run.ws / "query.json", {{"count", hits.size()}, {"vignettes", ids}});
  run.results = {{"count", hits.size()}};
  run.artifact(run.ws / "query.json");
}

void cmd_coverage(Run& run, const std::string& regions_file) {
  const auto idx = load_index(run);
  const json doc = read_document(regions_file, Errc::Usage);
  if (!doc.is_array()) throw Error(Errc::Usage, "regions file must be an array of {name, polygon}");
  std::vector<NamedRegion> regions;
  for (const auto& r : doc)
    regions.push_back({get_field<std::string>(r, "name", Errc::Usage), ring_from_json(get_field<json>(r, "polygon", Errc::Usage), "polygon")});
  const auto table = idx.coverage_stats(regions);
  json rows = json::array();
  for (const auto& [name, n] : table.rows) {
    std::printf("%-24s %8zu\n", name.c_str(), n);
    rows.push_back({{"region", name}, {"vignettes", n}});
  }
  std::printf("%-24s %8zu\n", "total", table.total);
  write_document(run.ws / "coverage.json", {{"rows", rows}, {"total", table.total}});
  run.results = {{"total", table.total}, {"regions", table.rows.size()}};
  run.artifact(run.ws / "coverage.json");
}

struct StacksArgs {
  std::string aoi, aoi_file;
  double min_overlap = default_min_overlap;
  std::size_t min_count = 2;
};

json stack_summary(const DiscoveredStack& s, std::size_t index) {
  json ids = json::array();
  std::size_t rendered = 0;
  for (const auto& m : s.members) {
    ids.push_back(m.vignette_id);
    rendered += !m.raster_uri.empty();
  }
  return {{"index", index}, {"relative_orbit", s.key.relative_orbit}, {"beam", to_string(s.key.beam)},
          {"pass_direction", to_string(s.key.pass_direction)}, {"members", ids}, {"with_payload", rendered}};
}

void cmd_stacks(Run& run, const StacksArgs& a) {
  const auto idx = load_index(run);
  const auto stacks = idx.discover_stacks(parse_aoi(a.aoi, a.aoi_file), a.min_overlap, a.min_count);
  json list = json::array();
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    const auto& s = stacks[i];
    std::printf("[%zu] orbit %d %s %s: %zu members, first %s\n", i, s.key.relative_orbit, to_string(s.key.beam).c_str(),
                to_string(s.key.pass_direction).c_str(), s.members.size(), s.members.front().vignette_id.c_str());
    list.push_back(stack_summary(s, i));
  }
  write_document(run.ws / "stacks.json", list);
  run.results = {{"stacks", stacks.size()}};
  run.artifact(run.ws / "stacks.json");
}

/// Grid covering `box` (map metres) in `frame`.
MapGrid grid_for(const LocalFrame& frame, double posting, const bgeo::Box& box) {
  return MapGrid::covering(frame, posting, box.min_corner().x(), box.max_corner().x(), box.min_corner().y(),
                           box.max_corner().y());
}

LocalFrame frame_at(const VignetteRecord& r) {
  double lon = 0, lat = 0;
  for (const auto& p : r.footprint) lon += p.lon, lat += p.lat;
  return LocalFrame(lon / double(r.footprint.size()), lat / double(r.footprint.size()));
}

bgeo::Box aoi_box(const LocalFrame& frame, const Ring& aoi) {
  Ring m;
  for (const auto& v : aoi) {
    const auto en = frame.from_lonlat(v.lon, v.lat);
    m.push_back({en[0], en[1]});
  }
  return boost::geometry::return_envelope<bgeo::Box>(bgeo::to_polygon(m));
}

struct GeocodeArgs {
  std::string id, aoi, aoi_file;
};

void cmd_geocode(Run& run, const GeocodeArgs& a) {
  const auto idx = load_index(run);
  const auto& r = require_record(idx, a.id);
  const auto side = GeometrySidecar::from_json(read_document(run.ws / r.geometry_uri));
  const LocalFrame frame = frame_at(r);
  bgeo::Box box;
  if (a.aoi.empty() && a.aoi_file.empty()) {
    box = boost::geometry::return_envelope<bgeo::Box>(
        detail::map_quad(radar_footprint_on_map(side.geometry, side.orbit, frame, 0.0)));
  } else {
    box = aoi_box(frame, parse_aoi(a.aoi, a.aoi_file));
  }
  const auto grid = grid_for(frame, run.cfg.posting, box);
  const auto slc = read_complex_raster(run.ws / r.raster_uri, side.geometry.n_lines, side.geometry.n_samples);
  GeocodeOptions opt;
  opt.jobs = run.cfg.jobs;
  const auto g = geocode(slc, side.geometry, side.orbit, grid, opt);
  const fs::path stem = run.ws / "geocoded" / a.id;
  g.save(stem);
  std::printf("geocoded %s onto %zu x %zu cells at %.2f m (%zu valid)\n", a.id.c_str(), grid.n_north, grid.n_east,
              grid.posting, g.valid_count());
  run.results = {{"vignette", a.id}, {"grid", grid.to_json()}, {"valid_cells", g.valid_count()}};
  for (const char* ext : {".slc", ".mask", ".grid.json"}) run.artifact(stem.string() + ext);
}

struct PairArgs {
  std::string a, b;
};

WindowPlan window_plan(const RunConfig& cfg) {
  WindowPlan wp;
  wp.size = cfg.window;
  wp.min_peak = cfg.min_peak;
  wp.jobs = cfg.jobs;
  return wp;
}

void cmd_coregister(Run& run, const PairArgs& a) {
  const auto idx = load_index(run);
  const auto& ra = require_record(idx, a.a);
  const auto& rb = require_record(idx, a.b);
  const auto sa = GeometrySidecar::from_json(read_document(run.ws / ra.geometry_uri));
  const auto sb = GeometrySidecar::from_json(read_document(run.ws / rb.geometry_uri));
  const LocalFrame frame = frame_at(ra);
  bgeo::MultiPolygon common;
  boost::geometry::intersection(detail::map_quad(radar_footprint_on_map(sa.geometry, sa.orbit, frame, 0.0)),
                                detail::map_quad(radar_footprint_on_map(sb.geometry, sb.orbit, frame, 0.0)), common);
  if (boost::geometry::area(common) <= 0) throw Error(Errc::InsufficientOverlap, "vignettes do not overlap");
  const auto grid = grid_for(frame, run.cfg.posting, detail::inscribed_box(common));
  GeocodeOptions gopt;
  gopt.jobs = run.cfg.jobs;
  const auto ga = geocode(read_complex_raster(run.ws / ra.raster_uri, sa.geometry.n_lines, sa.geometry.n_samples),
                          sa.geometry, sa.orbit, grid, gopt);
  const auto gb = geocode(read_complex_raster(run.ws / rb.raster_uri, sb.geometry.n_lines, sb.geometry.n_samples),
                          sb.geometry, sb.orbit, grid, gopt);
  const auto m = measure_pair(ga, gb, window_plan(run.cfg));
  const Vec3 centre = frame.to_ecef(m.window_east, m.window_north, 0.0);
  const auto radar = offset_jacobian(sb.orbit, sb.geometry, frame, centre, 0.0).to_radar(m.d_east, m.d_north);
  std::printf("%s -> %s: d_east %.3f m, d_north %.3f m, peak %.4f, snr %.1f, %zu windows\n", a.a.c_str(), a.b.c_str(),
              m.d_east, m.d_north, m.peak_correlation, m.snr, m.windows_used);
  std::printf("radar offset of %s: dt %.4f ms, dr %.3f m\n", a.b.c_str(), radar.dt_azimuth, radar.d_range);
  const json doc{{"scene_a", a.a},          {"scene_b", a.b},        {"d_east_m", m.d_east},
                 {"d_north_m", m.d_north},  {"peak", m.peak_correlation}, {"snr", m.snr},
                 {"windows", m.windows_used}, {"dt_azimuth_ms", radar.dt_azimuth}, {"d_range_m", radar.d_range},
                 {"grid", grid.to_json()}};
  const fs::path out = run.ws / "coregister" / (a.a + "__" + a.b + ".json");
  write_document(out, doc);
  run.results = doc;
  run.artifact(out);
}

struct StackArgs {
  std::string ids, aoi, aoi_file, reference;
  std::optional<std::size_t> stack;
  bool drop_stage1 = false;
};

void cmd_stack(Run& run, const StackArgs& a) {
  const auto idx = load_index(run);
  std::vector<StackInput> inputs;
  std::optional<Ring> aoi;
  if (!a.aoi.empty() || !a.aoi_file.empty()) aoi = parse_aoi(a.aoi, a.aoi_file);
  if (!a.ids.empty()) {
    for (const auto& id : split_ids(a.ids)) inputs.push_back(stack_input(run, require_record(idx, id)));
  } else {
    const auto stacks = idx.discover_stacks(aoi ? *aoi : box_ring(-180, -90, 180, 90), default_min_overlap, 2);
    auto with_payload = [&](const DiscoveredStack& s) {
      std::vector<StackInput> v;
      for (const auto& m : s.members)
        if (!m.raster_uri.empty()) v.push_back(stack_input(run, m));
      return v;
    };
    if (a.stack) {
      if (*a.stack >= stacks.size())
        throw Error(Errc::StackTooSmall, "no stack #" + std::to_string(*a.stack) + " among " + std::to_string(stacks.size()));
      inputs = with_payload(stacks[*a.stack]);
    } else {
      // First discovered stack with at least two rendered members.
      for (const auto& s : stacks)
        if ((inputs = with_payload(s)).size() >= 2) break;
    }
  }
  StackOptions opt;
  opt.posting = run.cfg.posting;
  opt.window = window_plan(run.cfg);
  opt.pair_k = run.cfg.pair_k;
  opt.min_peak = run.cfg.min_peak;
  opt.aoi_margin_m = run.cfg.aoi_margin_m;
  opt.keep_stage1 = run.cfg.keep_stage1 && !a.drop_stage1;
  opt.jobs = run.cfg.jobs;
  if (!a.reference.empty()) opt.reference = a.reference;
  if (inputs.size() < 2)
    throw Error(Errc::StackTooSmall, "stack needs at least 2 members with payloads, got " + std::to_string(inputs.size()));

  // The stack id is only known after sorting; generate into a staging name first.
  std::sort(inputs.begin(), inputs.end(), [](const StackInput& x, const StackInput& y) {
    return std::tie(x.record.sensing_start, x.record.vignette_id) < std::tie(y.record.sensing_start, y.record.vignette_id);
  });
  const auto ref = std::find_if(inputs.begin(), inputs.end(), [&](const StackInput& s) {
    return opt.reference ? s.record.vignette_id == *opt.reference : true;
  });
  if (ref == inputs.end()) throw Error(Errc::MemberNotInStack, a.reference + " is not a stack member");
  const std::string stack_id = detail::stack_id_of(ref->record);
  const fs::path dir = run.ws / "stacks" / stack_id;
  fs::remove_all(dir);
  const auto result = generate_stack(inputs, aoi, dir, opt);

  std::printf("stack %s: %zu members on %zu x %zu cells at %.2f m\n", stack_id.c_str(), result.manifest.members.size(),
              result.manifest.grid.n_north, result.manifest.grid.n_east, result.manifest.grid.posting);
  print_offsets(result.offsets);
  std::size_t dropped = 0;
  for (const auto& e : result.edges) dropped += e.peak_correlation < opt.min_peak;
  std::printf("edges %zu (%zu dropped), max residual after correction %.4f px\n", result.edges.size(), dropped,
              result.max_residual_px);
  const auto problems = check_stack(dir);
  for (const auto& p : problems) std::fprintf(stderr, "conformance: %s\n", p.c_str());
  run.results = {{"stack_id", stack_id},
                 {"members", result.manifest.members.size()},
                 {"grid", result.manifest.grid.to_json()},
                 {"reference", result.manifest.reference},
                 {"edges", result.edges.size()},
                 {"edges_dropped", dropped},
                 {"max_residual_px", result.max_residual_px},
                 {"scene_offsets", offsets_json(result.offsets)},
                 {"conformance_problems", problems}};
  for (const char* f : {"manifest.json", "qa/edges.csv", "qa/scene_offsets.csv", "qa/residual_edges.csv", "qa/offsets.png"})
    run.artifact(dir / f);
  if (!problems.empty()) throw Error(Errc::InvalidGeometry, "stack failed its conformance check");
}

std::string resolve_stack_id(const Run& run, const std::string& given) {
  if (!given.empty()) {
    if (!fs::exists(run.ws / "stacks" / given / "manifest.json")) throw Error(Errc::Usage, "no stack " + given + " in the workspace");
    return given;
  }
  std::vector<std::string> ids;
  if (fs::is_directory(run.ws / "stacks"))
    for (const auto& e : fs::directory_iterator(run.ws / "stacks"))
      if (fs::exists(e.path() / "manifest.json")) ids.push_back(e.path().filename().string());
  if (ids.size() != 1)
    throw Error(Errc::Usage, std::to_string(ids.size()) + " stacks in the workspace; choose one with --stack-id");
  return ids.front();
}

void cmd_tseries(Run& run, const std::string& stack_arg) {
  const std::string id = resolve_stack_id(run, stack_arg);
  const fs::path stack_dir = run.ws / "stacks" / id;
  const auto manifest = StackManifest::load(stack_dir);
  TimeSeriesParams p;
  p.analysis_posting = run.cfg.analysis_posting;
  p.looks = run.cfg.looks;
  p.cutoff = run.cfg.coherence_cutoff;
  p.max_baseline_days = run.cfg.max_baseline_days;
  p.series_limit = run.cfg.series_limit;
  p.jobs = run.cfg.jobs;
  const fs::path out = run.ws / "tseries" / id;
  fs::remove_all(out);
  const auto ts = run_time_series(manifest, stack_dir, out, p);

  double lo = 0, hi = 0, mean = 0;
  for (const auto& c : ts.cumulative) {
    lo = std::min(lo, c.cumulative_mm);
    hi = std::max(hi, c.cumulative_mm);
    mean += c.cumulative_mm;
  }
  if (!ts.cumulative.empty()) mean /= double(ts.cumulative.size());
  std::printf("tseries %s: %zu epochs, %zu interferograms, %zu of %zu cells selected (%.1f%%), %zu dropped by wrap guard\n",
              id.c_str(), ts.epochs.size(), ts.pairs.size(), ts.points.points.size(), ts.points.valid_cells,
              100.0 * ts.points.selected_fraction(), ts.result.dropped.size());
  std::printf("cumulative LOS deformation: mean %.2f mm, range [%.2f, %.2f] mm\n", mean, lo, hi);
  run.results = {{"stack_id", id},
                 {"epochs", ts.epochs.size()},
                 {"interferograms", ts.pairs.size()},
                 {"analysis_grid", ts.grid.to_json()},
                 {"valid_cells", ts.points.valid_cells},
                 {"selected_points", ts.points.points.size()},
                 {"selected_fraction", ts.points.selected_fraction()},
                 {"dropped_points", ts.result.dropped.size()},
                 {"mean_cumulative_mm", mean},
                 {"pair_coherence", ts.pair_coherence}};
  run.artifact(out / "points.csv");
  run.artifact(out / "pairs.csv");
  run.artifact(out / "deformation_map.png");
}

struct CompositeArgs {
  std::string stack_id, dates, out;
  double low = 2.0, high = 98.0;
};

void cmd_composite(Run& run, const CompositeArgs& a) {
  const std::string id = resolve_stack_id(run, a.stack_id);
  const fs::path dir = run.ws / "stacks" / id;
  const auto ids = split_ids(a.dates);
  if (ids.size() != 3) throw Error(Errc::Usage, "--dates needs three comma-separated member ids");
  if (!(a.low >= 0 && a.low < a.high && a.high <= 100)) throw Error(Errc::Usage, "stretch needs 0 <= low < high <= 100");
  const auto img = rgb_composite(StackManifest::load(dir), dir, {ids[0], ids[1], ids[2]}, {a.low, a.high});
  const fs::path out = a.out.empty() ? dir / "composite.png" : fs::path(a.out);
  write_png(out, img);
  std::printf("composite R=%s G=%s B=%s -> %s\n", ids[0].c_str(), ids[1].c_str(), ids[2].c_str(), out.string().c_str());
  run.results = {{"stack_id", id}, {"red", ids[0]}, {"green", ids[1]}, {"blue", ids[2]}, {"stretch", {a.low, a.high}}};
  run.artifact(out);
}

// ---------------------------------------------------------------- main

bool is_global_flag(const std::string& s) {
  for (const char* f : {"--config", "--workspace", "--jobs", "--seed"})
    if (s == f || s.rfind(std::string(f) + "=", 0) == 0) return true;
  return false;
}

int run_cli(std::vector<std::string> args, std::optional<json> preset_config) {
  CLI::App app{"WV-mode vignette indexing, stacking and time-series toolkit", "wvstack"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_file;
  std::optional<std::string> workspace;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_file, "JSON run configuration");
  app.add_option("--workspace", workspace, "workspace directory (falls back to WVSTACK_WORKSPACE)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "render a synthetic dataset from a simulation spec");
  simulate->add_option("--spec", sim_args.spec, "simulation spec (JSON)")->required();
  simulate->add_option("--out", sim_args.out, "dataset directory (default <workspace>/dataset)");

  IndexArgs index_args;
  auto* index = app.add_subcommand("index", "build the vignette index from granule manifests");
  index->add_option("manifests", index_args.inputs, "manifest files or directories (default <workspace>/dataset/manifests)");
  index->add_option("--root", index_args.root, "directory the manifests' payload URIs are relative to");
  index->add_flag("--append", index_args.append, "add to the existing index");

  QueryArgs query_args;
  auto* query = app.add_subcommand("query", "find vignettes by area, time and track");
  query->add_option("--aoi", query_args.aoi, "lon0,lat0,lon1,lat1");
  query->add_option("--aoi-file", query_args.aoi_file, "AOI polygon (JSON ring)");
  query->add_option("--start", query_args.start, "ISO-8601 UTC start");
  query->add_option("--end", query_args.end, "ISO-8601 UTC end");
  query->add_option("--beam", query_args.beam, "WV1 or WV2");
  query->add_option("--orbit", query_args.orbit, "relative orbit");
  query->add_option("--pass", query_args.pass, "ascending or descending");

  std::string regions_file;
  auto* coverage = app.add_subcommand("coverage", "count vignettes per named region");
  coverage->add_option("--regions", regions_file, "JSON array of {name, polygon}")->required();

  StacksArgs stacks_args;
  auto* stacks = app.add_subcommand("stacks", "discover repeat-pass stacks");
  stacks->add_option("--aoi", stacks_args.aoi, "lon0,lat0,lon1,lat1");
  stacks->add_option("--aoi-file", stacks_args.aoi_file, "AOI polygon (JSON ring)");
  stacks->add_option("--min-overlap", stacks_args.min_overlap, "footprint overlap fraction with the anchor");
  stacks->add_option("--min-count", stacks_args.min_count, "minimum members");

  GeocodeArgs geocode_args;
  auto* geocode_cmd = app.add_subcommand("geocode", "geocode one vignette onto a map grid");
  geocode_cmd->add_option("--id", geocode_args.id, "vignette id")->required();
  geocode_cmd->add_option("--aoi", geocode_args.aoi, "lon0,lat0,lon1,lat1 (default: raster footprint)");
  geocode_cmd->add_option("--aoi-file", geocode_args.aoi_file, "AOI polygon (JSON ring)");

  PairArgs pair_args;
  auto* coregister = app.add_subcommand("coregister", "measure the bulk shift between two vignettes");
  coregister->add_option("--a", pair_args.a, "first vignette id")->required();
  coregister->add_option("--b", pair_args.b, "second vignette id")->required();

  StackArgs stack_args;
  bool allow_small = false;
  auto* stack = app.add_subcommand("stack", "geocode, coregister and regrid a stack");
  stack->add_option("--ids", stack_args.ids, "comma-separated member ids");
  stack->add_option("--stack", stack_args.stack, "index into the discovered stacks (default: first with payloads)");
  stack->add_option("--aoi", stack_args.aoi, "lon0,lat0,lon1,lat1 (default: common footprint)");
  stack->add_option("--aoi-file", stack_args.aoi_file, "AOI polygon (JSON ring)");
  stack->add_option("--reference", stack_args.reference, "reference member (default earliest)");
  stack->add_flag("--drop-stage1", stack_args.drop_stage1, "delete the step-1 rasters when done");
  stack->add_flag("--allow-small-window", allow_small, "permit a correlation window below 1024");

  std::string tseries_stack;
  auto* tseries = app.add_subcommand("tseries", "deformation time series from a stack");
  tseries->add_option("--stack-id", tseries_stack, "stack directory name (default: the only stack)");

  CompositeArgs comp_args;
  auto* composite = app.add_subcommand("composite", "three-date RGB amplitude composite");
  composite->add_option("--stack-id", comp_args.stack_id, "stack directory name (default: the only stack)");
  composite->add_option("--dates", comp_args.dates, "three member ids for R,G,B")->required();
  composite->add_option("--low", comp_args.low, "lower stretch percentile");
  composite->add_option("--high", comp_args.high, "upper stretch percentile");
  composite->add_option("--out", comp_args.out, "output PNG (default <stack>/composite.png)");

  std::string report_file;
  auto* rerun = app.add_subcommand("rerun", "repeat a run from its report");
  rerun->add_option("report", report_file, "run report (JSON)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (rerun->parsed()) {
    const json report = read_document(report_file, Errc::Usage);
    std::vector<std::string> again{"wvstack"};
    const auto stored = get_field<std::vector<std::string>>(report, "argv", Errc::Usage);
    for (std::size_t i = 0; i < stored.size(); ++i) {
      if (is_global_flag(stored[i])) {
        if (stored[i].find('=') == std::string::npos) ++i;
        continue;
      }
      again.push_back(stored[i]);
    }
    return run_cli(again, get_field<json>(report, "config", Errc::Usage));
  }

  Run run;
  run.command = app.get_subcommands().front()->get_name();
  run.argv.assign(args.begin() + 1, args.end());
  json cfg_doc = json::object();
  if (preset_config)
    cfg_doc = *preset_config;
  else if (!config_file.empty())
    cfg_doc = read_document(config_file, Errc::Usage);
  run.cfg = RunConfig::from_json(cfg_doc);
  // A seed given on the command line or in the config overrides the simulation spec's seed.
  const bool seed_explicit = seed.has_value() || (cfg_doc.is_object() && cfg_doc.contains("seed"));
  if (jobs) run.cfg.jobs = *jobs;
  if (seed) run.cfg.seed = *seed;
  if (allow_small) run.cfg.allow_small_window = true;
  run.cfg.workspace = resolve_workspace(workspace, run.cfg);
  run.ws = run.cfg.workspace;
  for (const auto& w : run.cfg.validate()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  fs::create_directories(run.ws);

  if (simulate->parsed()) cmd_simulate(run, sim_args, seed_explicit);
  if (index->parsed()) cmd_index(run, index_args);
  if (query->parsed()) cmd_query(run, query_args);
  if (coverage->parsed()) cmd_coverage(run, regions_file);
  if (stacks->parsed()) cmd_stacks(run, stacks_args);
  if (geocode_cmd->parsed()) cmd_geocode(run, geocode_args);
  if (coregister->parsed()) cmd_coregister(run, pair_args);
  if (stack->parsed()) cmd_stack(run, stack_args);
  if (tseries->parsed()) cmd_tseries(run, tseries_stack);
  if (composite->parsed()) cmd_composite(run, comp_args);
  run.write_report();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args{"wvstack"};
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return run_cli(args, std::nullopt);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.category());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: malformed document: %s\n", e.what());
    return exit_code(ErrorCategory::Data);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(ErrorCategory::Data);
  }
}
