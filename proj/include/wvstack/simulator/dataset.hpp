#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wvstack/catalog/vignette.hpp"
#include "wvstack/simulator/scene.hpp"

namespace wvstack::sim {

/// Injected and true values for one scene.
struct TruthRecord {
  std::string vignette_id;
  std::size_t cycle = 0, slot = 0;
  double days = 0;
  double timing_error_ms = 0, range_error_m = 0;
  double true_azimuth_start = 0, true_near_range = 0;
  double meta_azimuth_start = 0, meta_near_range = 0;

  static TruthRecord of(const PlannedVignette& v) {
    return {v.record.vignette_id, v.cycle, v.slot, v.days, v.timing_error_ms, v.range_error_m,
            v.geometry.azimuth_start, v.geometry.near_range, v.metadata.azimuth_start, v.metadata.near_range};
  }
};

inline std::string truth_csv_header() {
  return "vignette_id,cycle,slot,days,timing_error_ms,range_error_m,true_azimuth_start,true_near_range,"
         "meta_azimuth_start,meta_near_range\n";
}

inline std::string truth_csv_row(const TruthRecord& t) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.3f,%.6f,%.6f,%.9f,%.6f,%.9f,%.6f\n", t.vignette_id.c_str(), t.cycle,
                t.slot, t.days, t.timing_error_ms, t.range_error_m, t.true_azimuth_start, t.true_near_range,
                t.meta_azimuth_start, t.meta_near_range);
  return buf;
}

inline std::vector<TruthRecord> read_truth_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<TruthRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw Error(Errc::MalformedManifest, "truth row has " + std::to_string(f.size()) + " fields");
    out.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                   std::stod(f[6]), std::stod(f[7]), std::stod(f[8]), std::stod(f[9])});
  }
  return out;
}

struct DatasetSummary {
  std::vector<std::filesystem::path> manifests;
  std::size_t planned = 0;
  std::size_t rendered = 0;
};

/// Layout under `dir`:
///   spec.json, truth.csv, manifests/<granule>.json,
///   slc/<id>.slc + slc/<id>.geom.json, truth/<id>.csv, truth/site_<slot>.json
inline DatasetSummary write_dataset(const SimulationSpec& spec, const std::filesystem::path& dir, int jobs = 1) {
  namespace fs = std::filesystem;
  const auto plan = synth_plan(spec);
  DatasetSummary summary;
  summary.planned = plan.size();
  write_document(dir / "spec.json", spec.to_json());

  std::map<std::size_t, GranuleManifest> granules;
  for (const auto& v : plan) {
    auto& g = granules[v.cycle];
    g.granule_id = v.record.granule_id;
    g.vignettes.push_back(v.record);
  }
  for (auto& [cycle, g] : granules) {
    g.bounding_box = bounding_box_of(g.vignettes);
    const auto path = dir / "manifests" / (g.granule_id + ".json");
    write_text(path, serialize_manifest(g));
    summary.manifests.push_back(path);
  }

  std::string truth_all = truth_csv_header();
  for (std::size_t slot : spec.render_slots) {
    std::vector<const PlannedVignette*> members;
    for (const auto& v : plan)
      if (v.slot == slot) members.push_back(&v);
    const SiteScene site = build_site(spec, members);
    json site_doc = site.to_json();
    site_doc["origin_lon"] = site.frame.origin_lon();
    site_doc["origin_lat"] = site.frame.origin_lat();
    write_document(dir / "truth" / ("site_" + std::to_string(slot) + ".json"), site_doc);
    for (const auto* v : members) {
      const auto slc = synth_slc(spec, site, *v, jobs);
      write_complex_raster(dir / v->record.raster_uri, slc);
      write_document(dir / v->record.geometry_uri, GeometrySidecar{v->metadata, v->orbit}.to_json());
      const auto row = truth_csv_row(TruthRecord::of(*v));
      write_text(dir / "truth" / (v->record.vignette_id + ".csv"), truth_csv_header() + row);
      truth_all += row;
      ++summary.rendered;
    }
  }
  write_text(dir / "truth.csv", truth_all);
  return summary;
}

/// Site frame written by write_dataset for `slot`.
inline LocalFrame read_site_frame(const std::filesystem::path& dataset, std::size_t slot) {
  const auto j = read_document(dataset / "truth" / ("site_" + std::to_string(slot) + ".json"));
  return LocalFrame(get_field<double>(j, "origin_lon"), get_field<double>(j, "origin_lat"));
}

}  // namespace wvstack::sim
