#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "wvstack/coregistration/network.hpp"
#include "wvstack/core/io.hpp"
#include "wvstack/core/time.hpp"
#include "wvstack/geometry/map_grid.hpp"

namespace wvstack {

struct StackMemberEntry {
  std::string vignette_id;
  UtcTime sensing_start{};
  std::string raster;    // stem relative to the stack directory (.slc/.mask/.grid.json)
  std::string geometry;  // corrected sidecar, relative to the stack directory
  SceneOffset applied;
};

struct StackManifest {
  std::string stack_id;
  MapGrid grid;
  std::string reference;
  std::vector<StackMemberEntry> members;

  const StackMemberEntry* find(const std::string& id) const {
    for (const auto& m : members)
      if (m.vignette_id == id) return &m;
    return nullptr;
  }

  json to_json() const {
    json ms = json::array();
    for (const auto& m : members)
      ms.push_back({{"vignette_id", m.vignette_id},
                    {"sensing_start", format_utc(m.sensing_start)},
                    {"raster", m.raster},
                    {"geometry", m.geometry},
                    {"applied_offset",
                     {{"dt_azimuth_ms", m.applied.dt_azimuth},
                      {"d_range_m", m.applied.d_range},
                      {"d_east_m", m.applied.d_east},
                      {"d_north_m", m.applied.d_north},
                      {"residual_m", m.applied.residual}}}});
    return {{"stack_id", stack_id}, {"reference", reference}, {"grid", grid.to_json()}, {"members", ms}};
  }

  static StackManifest from_json(const json& j) {
    StackManifest s;
    s.stack_id = get_field<std::string>(j, "stack_id");
    s.reference = get_field<std::string>(j, "reference");
    s.grid = MapGrid::from_json(get_field<json>(j, "grid"));
    for (const auto& m : get_field<json>(j, "members")) {
      StackMemberEntry e;
      e.vignette_id = get_field<std::string>(m, "vignette_id");
      e.sensing_start = parse_utc(get_field<std::string>(m, "sensing_start"));
      e.raster = get_field<std::string>(m, "raster");
      e.geometry = get_field<std::string>(m, "geometry");
      const auto& o = get_field<json>(m, "applied_offset");
      e.applied.scene = e.vignette_id;
      e.applied.dt_azimuth = get_field<double>(o, "dt_azimuth_ms");
      e.applied.d_range = get_field<double>(o, "d_range_m");
      e.applied.d_east = get_field<double>(o, "d_east_m");
      e.applied.d_north = get_field<double>(o, "d_north_m");
      e.applied.residual = get_field<double>(o, "residual_m");
      s.members.push_back(std::move(e));
    }
    return s;
  }

  void save(const std::filesystem::path& stack_dir) const { write_document(stack_dir / "manifest.json", to_json()); }
  static StackManifest load(const std::filesystem::path& stack_dir) {
    return from_json(read_document(stack_dir / "manifest.json"));
  }
};

/// Independent structural check of a stack directory. Returns one line per
/// problem; an empty list means the stack conforms.
inline std::vector<std::string> check_stack(const std::filesystem::path& stack_dir) {
  std::vector<std::string> problems;
  StackManifest m;
  try {
    m = StackManifest::load(stack_dir);
  } catch (const std::exception& e) {
    return {std::string("manifest unreadable: ") + e.what()};
  }
  const std::string grid_text = m.grid.to_json().dump();
  bool have_reference = false;
  for (std::size_t i = 0; i < m.members.size(); ++i) {
    const auto& e = m.members[i];
    if (i > 0 && std::tie(e.sensing_start, e.vignette_id) <
                     std::tie(m.members[i - 1].sensing_start, m.members[i - 1].vignette_id))
      problems.push_back(e.vignette_id + ": members not in acquisition order");
    if (e.vignette_id == m.reference) {
      have_reference = true;
      if (e.applied.dt_azimuth != 0.0 || e.applied.d_range != 0.0 || e.applied.d_east != 0.0 || e.applied.d_north != 0.0)
        problems.push_back(e.vignette_id + ": reference carries a nonzero offset");
    }
    const std::filesystem::path stem = stack_dir / e.raster;
    try {
      if (read_document(stem.string() + ".grid.json").dump() != grid_text)
        problems.push_back(e.vignette_id + ": grid metadata differs from the manifest grid");
    } catch (const std::exception& ex) {
      problems.push_back(e.vignette_id + ": " + ex.what());
      continue;
    }
    namespace fs = std::filesystem;
    std::error_code ec;
    const auto slc_size = fs::file_size(stem.string() + ".slc", ec);
    if (ec || slc_size != m.grid.cells() * 8) problems.push_back(e.vignette_id + ": raster size does not match grid");
    const auto mask_size = fs::file_size(stem.string() + ".mask", ec);
    if (ec || mask_size != m.grid.cells()) problems.push_back(e.vignette_id + ": mask size does not match grid");
  }
  if (!have_reference) problems.push_back("reference " + m.reference + " is not a member");
  return problems;
}

}  // namespace wvstack
