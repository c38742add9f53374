#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/geometry/index/rtree.hpp>

#include "wvstack/catalog/polygon.hpp"
#include "wvstack/catalog/vignette.hpp"

namespace wvstack {

/// Closed time interval; a missing bound is unbounded on that side.
struct TimeInterval {
  std::optional<UtcTime> start;
  std::optional<UtcTime> end;

  bool contains(UtcTime t) const { return (!start || t >= *start) && (!end || t <= *end); }
};

struct QueryFilters {
  std::optional<Beam> beam;
  std::optional<int> relative_orbit;
  std::optional<PassDirection> pass_direction;

  bool accepts(const VignetteRecord& r) const {
    return (!beam || r.beam == *beam) && (!relative_orbit || r.relative_orbit == *relative_orbit) &&
           (!pass_direction || r.pass_direction == *pass_direction);
  }
};

struct StackKey {
  int relative_orbit = 0;
  Beam beam = Beam::WV1;
  PassDirection pass_direction = PassDirection::Ascending;
  Ring anchor_footprint;
};

struct DiscoveredStack {
  StackKey key;
  std::vector<VignetteRecord> members;  // sorted by sensing_start, anchor first
};

struct NamedRegion {
  std::string name;
  Ring polygon;
};

struct CoverageTable {
  std::vector<std::pair<std::string, std::size_t>> rows;
  /// Sum of the per-region rows (a vignette in two regions counts twice).
  std::size_t total = 0;
};

inline constexpr double default_min_overlap = 0.5;

/// Vignette catalog with a footprint R-tree, a time-ordered list and an id map.
/// Queries are const and safe to run concurrently once loading is done.
class VignetteIndex {
 public:
  /// Returns false when the id is already present (the index is unchanged).
  bool insert(const VignetteRecord& r) {
    if (by_id_.count(r.vignette_id)) return false;
    validate_record(r);
    const std::size_t slot = records_.size();
    records_.push_back(r);
    polygons_.push_back(bgeo::to_polygon(r.footprint));
    by_id_.emplace(r.vignette_id, slot);
    tree_.insert({bgeo::envelope(polygons_.back()), slot});
    const auto pos = std::upper_bound(by_time_.begin(), by_time_.end(), slot,
                                      [&](std::size_t a, std::size_t b) { return earlier(a, b); });
    by_time_.insert(pos, slot);
    return true;
  }

  std::size_t insert_manifest(const GranuleManifest& m) {
    std::size_t added = 0;
    for (const auto& v : m.vignettes) added += insert(v) ? 1 : 0;
    return added;
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const VignetteRecord* find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  /// All records in (sensing_start, vignette_id) order.
  std::vector<VignetteRecord> all() const {
    std::vector<VignetteRecord> out;
    out.reserve(by_time_.size());
    for (auto i : by_time_) out.push_back(records_[i]);
    return out;
  }

  std::vector<VignetteRecord> query(const Ring& aoi, const TimeInterval& interval = {},
                                    const QueryFilters& filters = {}) const {
    validate_ring(aoi, Errc::InvalidPolygon, "aoi");
    if (interval.start && interval.end && *interval.start > *interval.end)
      throw Error(Errc::Usage, "query interval starts after it ends");
    std::vector<VignetteRecord> out;
    for (auto i : spatial_hits(bgeo::to_polygon(aoi)))
      if (interval.contains(records_[i].sensing_start) && filters.accepts(records_[i])) out.push_back(records_[i]);
    return out;
  }

  std::vector<DiscoveredStack> discover_stacks(const Ring& aoi, double min_overlap = default_min_overlap,
                                               std::size_t min_count = 2) const {
    validate_ring(aoi, Errc::InvalidPolygon, "aoi");
    if (!(min_overlap > 0.0 && min_overlap <= 1.0)) throw Error(Errc::Usage, "min_overlap must be in (0, 1]");
    if (min_count < 2) throw Error(Errc::Usage, "min_count must be at least 2");

    std::map<std::tuple<int, int, int>, std::vector<std::size_t>> groups;
    for (auto i : spatial_hits(bgeo::to_polygon(aoi))) {
      const auto& r = records_[i];
      groups[{r.relative_orbit, static_cast<int>(r.beam), static_cast<int>(r.pass_direction)}].push_back(i);
    }

    std::vector<DiscoveredStack> stacks;
    for (auto& [key, slots] : groups) {
      std::vector<bool> taken(slots.size(), false);
      for (std::size_t a = 0; a < slots.size(); ++a) {
        if (taken[a]) continue;
        taken[a] = true;
        const auto& anchor = polygons_[slots[a]];
        const double anchor_area = boost::geometry::area(anchor);
        DiscoveredStack s;
        s.key = {std::get<0>(key), static_cast<Beam>(std::get<1>(key)), static_cast<PassDirection>(std::get<2>(key)),
                 records_[slots[a]].footprint};
        s.members.push_back(records_[slots[a]]);
        for (std::size_t b = a + 1; b < slots.size(); ++b) {
          if (taken[b]) continue;
          if (bgeo::intersection_area(anchor, polygons_[slots[b]]) >= min_overlap * anchor_area) {
            taken[b] = true;
            s.members.push_back(records_[slots[b]]);
          }
        }
        if (s.members.size() >= min_count) stacks.push_back(std::move(s));
      }
    }
    std::sort(stacks.begin(), stacks.end(), [](const DiscoveredStack& x, const DiscoveredStack& y) {
      return std::tie(x.members.front().sensing_start, x.members.front().vignette_id) <
             std::tie(y.members.front().sensing_start, y.members.front().vignette_id);
    });
    return stacks;
  }

  CoverageTable coverage_stats(const std::vector<NamedRegion>& regions) const {
    if (regions.empty()) throw Error(Errc::Usage, "coverage needs at least one region");
    CoverageTable table;
    for (const auto& region : regions) {
      validate_ring(region.polygon, Errc::InvalidPolygon, region.name);
      const std::size_t n = spatial_hits(bgeo::to_polygon(region.polygon)).size();
      table.rows.emplace_back(region.name, n);
      table.total += n;
    }
    return table;
  }

  json to_json() const {
    json recs = json::array();
    for (auto i : by_time_) recs.push_back(record_to_json(records_[i]));
    return {{"format", "wvstack-vignette-index"}, {"version", 1}, {"records", recs}};
  }

  static VignetteIndex from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "wvstack-vignette-index")
      throw Error(Errc::MalformedManifest, "not a vignette index document");
    VignetteIndex idx;
    for (const auto& r : get_field<json>(j, "records")) idx.insert(record_from_json(r));
    return idx;
  }

  void save(const std::filesystem::path& path) const { write_document(path, to_json()); }
  static VignetteIndex load(const std::filesystem::path& path) { return from_json(read_document(path)); }

 private:
  using Entry = std::pair<bgeo::Box, std::size_t>;

  bool earlier(std::size_t a, std::size_t b) const {
    return std::tie(records_[a].sensing_start, records_[a].vignette_id) <
           std::tie(records_[b].sensing_start, records_[b].vignette_id);
  }

  /// Slots whose footprint intersects `area`, in time order.
  std::vector<std::size_t> spatial_hits(const bgeo::Polygon& area) const {
    std::vector<Entry> candidates;
    tree_.query(boost::geometry::index::intersects(bgeo::envelope(area)), std::back_inserter(candidates));
    std::vector<std::size_t> hits;
    for (const auto& [box, slot] : candidates)
      if (boost::geometry::intersects(polygons_[slot], area)) hits.push_back(slot);
    std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) { return earlier(a, b); });
    return hits;
  }

  std::vector<VignetteRecord> records_;
  std::vector<bgeo::Polygon> polygons_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::size_t> by_time_;
  boost::geometry::index::rtree<Entry, boost::geometry::index::rstar<16>> tree_;
};

}  // namespace wvstack
