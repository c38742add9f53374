#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "wvstack/catalog/index.hpp"
#include "wvstack/catalog/vignette.hpp"

using namespace wvstack;

namespace {

// Brute-force planar polygon predicates, written without Boost.
struct P {
  double x, y;
};

double cross(P o, P a, P b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(P a, P b, P p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(P a, P b, P c, P d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) || (d3 == 0 && on_segment(a, b, c)) ||
         (d4 == 0 && on_segment(a, b, d));
}

bool inside(const Ring& r, P p) {
  bool in = false;
  for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
    if ((r[i].lat > p.y) != (r[j].lat > p.y) &&
        p.x < (r[j].lon - r[i].lon) * (p.y - r[i].lat) / (r[j].lat - r[i].lat) + r[i].lon)
      in = !in;
  }
  return in;
}

bool oracle_intersects(const Ring& a, const Ring& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto& a0 = a[i];
      const auto& a1 = a[(i + 1) % a.size()];
      const auto& b0 = b[j];
      const auto& b1 = b[(j + 1) % b.size()];
      if (segments_touch({a0.lon, a0.lat}, {a1.lon, a1.lat}, {b0.lon, b0.lat}, {b1.lon, b1.lat})) return true;
    }
  return inside(a, {b[0].lon, b[0].lat}) || inside(b, {a[0].lon, a[0].lat});
}

// Square footprint of side `side_km` centred on (lon, lat), rotated by `rot_deg`.
Ring square(double lon, double lat, double side_km = 20.0, double rot_deg = 0.0) {
  const double h = side_km / 2.0 / 111.32;
  const double c = std::cos(rot_deg * M_PI / 180.0), s = std::sin(rot_deg * M_PI / 180.0);
  const double k = 1.0 / std::cos(lat * M_PI / 180.0);
  Ring r;
  for (auto [u, v] : {std::pair{-h, -h}, {h, -h}, {h, h}, {-h, h}})
    r.push_back({lon + (c * u - s * v) * k, lat + s * u + c * v});
  return r;
}

VignetteRecord make_record(const std::string& id, const Ring& fp, UtcTime t, int orbit = 10, Beam beam = Beam::WV1,
                           PassDirection pass = PassDirection::Descending) {
  VignetteRecord r;
  r.vignette_id = id;
  r.granule_id = "G-" + std::to_string(orbit);
  r.relative_orbit = orbit;
  r.beam = beam;
  r.pass_direction = pass;
  r.sensing_start = t;
  r.footprint = fp;
  r.raster_uri = "slc/" + id + ".slc";
  r.geometry_uri = "slc/" + id + ".geom.json";
  return r;
}

UtcTime t0() { return parse_utc("2021-01-05T06:00:00.000000Z"); }

GranuleManifest manifest_with(std::size_t n) {
  GranuleManifest m;
  m.granule_id = "S1A_WV_SLC_TEST";
  for (std::size_t i = 0; i < n; ++i)
    m.vignettes.push_back(make_record("v" + std::to_string(i), square(10.0 + 0.9 * double(i % 40), -30.0 - double(i / 40)),
                                      add_seconds(t0(), 4.0 * double(i))));
  m.bounding_box = bounding_box_of(m.vignettes);
  return m;
}

std::vector<std::string> ids(const std::vector<VignetteRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.vignette_id);
  return out;
}

}  // namespace

TEST(Manifest, NominalCountIsNotFlagged) {
  const auto m = parse_manifest(serialize_manifest(manifest_with(30)));
  EXPECT_EQ(m.vignettes.size(), 30u);
  EXPECT_FALSE(m.out_of_nominal_range());
}

TEST(Manifest, EmptyAndOversizedAreFlagged) {
  const auto empty = parse_manifest(R"({"granule_id": "G", "vignettes": []})");
  EXPECT_EQ(empty.vignettes.size(), 0u);
  EXPECT_TRUE(empty.out_of_nominal_range());
  const auto big = parse_manifest(serialize_manifest(manifest_with(200)));
  EXPECT_EQ(big.vignettes.size(), 200u);
  EXPECT_TRUE(big.out_of_nominal_range());
  EXPECT_FALSE(parse_manifest(serialize_manifest(manifest_with(15))).out_of_nominal_range());
  EXPECT_FALSE(parse_manifest(serialize_manifest(manifest_with(160))).out_of_nominal_range());
  EXPECT_TRUE(parse_manifest(serialize_manifest(manifest_with(14))).out_of_nominal_range());
}

TEST(Manifest, SerializeParseIsIdentity) {
  const auto m = manifest_with(37);
  const auto text = serialize_manifest(m);
  const auto back = parse_manifest(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_manifest(back), text);
}

TEST(Manifest, BoundingBoxRecomputedWhenAbsent) {
  auto m = manifest_with(20);
  auto j = json::parse(serialize_manifest(m));
  j.erase("bounding_box");
  const auto back = parse_manifest(j.dump());
  double lon_min = 1e9, lon_max = -1e9;
  for (const auto& v : m.vignettes)
    for (const auto& p : v.footprint) lon_min = std::min(lon_min, p.lon), lon_max = std::max(lon_max, p.lon);
  ASSERT_EQ(back.bounding_box.size(), 4u);
  EXPECT_DOUBLE_EQ(back.bounding_box[0].lon, lon_min);
  EXPECT_DOUBLE_EQ(back.bounding_box[1].lon, lon_max);
}

TEST(Manifest, ErrorsNameTheProblem) {
  EXPECT_THROW(
      {
        try {
          parse_manifest("{\"granule_id\": ");
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::MalformedManifest);
          throw;
        }
      },
      Error);

  auto j = json::parse(serialize_manifest(manifest_with(2)));
  j["vignettes"][1].erase("sensing_start");
  try {
    parse_manifest(j.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingField);
    EXPECT_NE(std::string(e.what()).find("sensing_start"), std::string::npos);
  }

  j = json::parse(serialize_manifest(manifest_with(2)));
  j["vignettes"][0]["swath"] = "x";
  try {
    parse_manifest(j.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedManifest);
  }
}

TEST(Manifest, RejectsBadFootprints) {
  auto expect_footprint_error = [](Ring fp) {
    auto j = json::parse(serialize_manifest(manifest_with(1)));
    j.erase("bounding_box");
    j["vignettes"][0]["footprint"] = ring_to_json(fp);
    try {
      parse_manifest(j.dump());
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidFootprint) << e.what();
    }
  };
  auto bowtie = square(20.0, 10.0);
  std::swap(bowtie[1], bowtie[2]);
  expect_footprint_error(bowtie);
  expect_footprint_error({{20.0, 10.0}, {20.1, 10.0}, {20.2, 10.0}, {20.3, 10.0}});
  expect_footprint_error(square(20.0, 10.0, 10.0));    // too small
  expect_footprint_error(square(20.0, 10.0, 40.0));    // too large
  expect_footprint_error(square(179.95, 10.0));        // spans the antimeridian
  expect_footprint_error({{20.0, 10.0}, {20.2, 10.0}, {20.1, 10.2}});
}

TEST(Manifest, RejectsMemberOutsideBoundingBox) {
  auto j = json::parse(serialize_manifest(manifest_with(3)));
  j["bounding_box"] = ring_to_json(box_ring(0.0, 0.0, 1.0, 1.0));
  try {
    parse_manifest(j.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidFootprint);
  }
}

TEST(Manifest, RejectsOrbitOutOfRange) {
  auto j = json::parse(serialize_manifest(manifest_with(1)));
  j["vignettes"][0]["relative_orbit"] = 176;
  EXPECT_THROW(parse_manifest(j.dump()), Error);
}

TEST(Index, DuplicateInsertIsIdempotent) {
  VignetteIndex idx;
  const auto r = make_record("a", square(5, 5), t0());
  EXPECT_TRUE(idx.insert(r));
  EXPECT_FALSE(idx.insert(r));
  EXPECT_EQ(idx.size(), 1u);
  ASSERT_NE(idx.find("a"), nullptr);
  EXPECT_EQ(*idx.find("a"), r);
}

TEST(Index, DisjointAndUniversalQueries) {
  VignetteIndex idx;
  idx.insert_manifest(manifest_with(50));
  EXPECT_TRUE(idx.query(box_ring(-60, 40, -50, 50)).empty());
  EXPECT_EQ(idx.query(box_ring(-180, -89, 180, 89)).size(), 50u);
  EXPECT_THROW(idx.query({{0, 0}, {1, 1}, {0, 1}, {1, 0}}), Error);
}

TEST(Index, RandomizedQueriesMatchBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lon(-20.0, 20.0), lat(-15.0, 15.0), rot(0.0, 90.0), side(15.0, 30.0);
  std::uniform_int_distribution<int> orbit(1, 4), day(0, 200);
  VignetteIndex idx;
  std::vector<VignetteRecord> all;
  for (int i = 0; i < 2000; ++i) {
    auto r = make_record("r" + std::to_string(i), square(lon(rng), lat(rng), side(rng), rot(rng)),
                         add_seconds(t0(), 86400.0 * day(rng) + i), orbit(rng), i % 2 ? Beam::WV1 : Beam::WV2);
    idx.insert(r);
    all.push_back(r);
  }
  std::uniform_real_distribution<double> aoi_size(0.05, 8.0);
  std::size_t nonempty = 0;
  for (int q = 0; q < 200; ++q) {
    const double cx = lon(rng), cy = lat(rng), w = aoi_size(rng), h = aoi_size(rng);
    Ring aoi{{cx - w, cy - h}, {cx + w, cy - h * 0.7}, {cx + w * 0.8, cy + h}, {cx - w * 0.6, cy + h * 0.9}};
    TimeInterval interval;
    if (q % 3 == 0) interval = {add_seconds(t0(), 86400.0 * 30), add_seconds(t0(), 86400.0 * 120)};
    QueryFilters filters;
    if (q % 4 == 1) filters.relative_orbit = 2;
    if (q % 5 == 2) filters.beam = Beam::WV2;

    std::vector<VignetteRecord> expected;
    for (const auto& r : all)
      if (oracle_intersects(r.footprint, aoi) && interval.contains(r.sensing_start) && filters.accepts(r))
        expected.push_back(r);
    std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
      return std::tie(a.sensing_start, a.vignette_id) < std::tie(b.sensing_start, b.vignette_id);
    });
    const auto got = idx.query(aoi, interval, filters);
    EXPECT_EQ(ids(got), ids(expected)) << "query " << q;
    nonempty += !expected.empty();
  }
  EXPECT_GT(nonempty, 100u);
}

TEST(Index, PersistenceRoundTripsQueries) {
  VignetteIndex idx;
  idx.insert_manifest(manifest_with(80));
  const auto path = std::filesystem::temp_directory_path() / "wvstack_catalog_test" / "index.json";
  idx.save(path);
  const auto back = VignetteIndex::load(path);
  const auto aoi = box_ring(12, -31.5, 25, -29);
  EXPECT_EQ(back.query(aoi), idx.query(aoi));
  EXPECT_EQ(back.all(), idx.all());
  std::filesystem::remove_all(path.parent_path());
}

TEST(Stacks, RepeatsOfOneFootprintFormOneStack) {
  VignetteIndex idx;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter(0.0, 0.01);
  for (int i = 0; i < 24; ++i)
    idx.insert(make_record("p" + std::to_string(i), square(150.0 + jitter(rng), -27.0 + jitter(rng)),
                           add_seconds(t0(), 12.0 * 86400.0 * i)));
  const auto stacks = idx.discover_stacks(box_ring(149, -28, 151, -26), 0.5, 2);
  ASSERT_EQ(stacks.size(), 1u);
  EXPECT_EQ(stacks[0].members.size(), 24u);
  EXPECT_EQ(stacks[0].members.front().vignette_id, "p0");
  EXPECT_EQ(stacks[0].key.anchor_footprint, stacks[0].members.front().footprint);
}

TEST(Stacks, TracksDoNotMix) {
  VignetteIndex idx;
  for (int i = 0; i < 10; ++i) {
    idx.insert(make_record("a" + std::to_string(i), square(150.0, -27.0), add_seconds(t0(), 12.0 * 86400.0 * i), 9));
    idx.insert(make_record("b" + std::to_string(i), square(150.05, -27.02, 20.0, 10.0),
                           add_seconds(t0(), 12.0 * 86400.0 * i + 3600.0), 38));
  }
  const auto stacks = idx.discover_stacks(box_ring(149, -28, 151, -26));
  ASSERT_EQ(stacks.size(), 2u);
  std::set<std::string> seen;
  for (const auto& s : stacks) {
    EXPECT_EQ(s.members.size(), 10u);
    for (const auto& m : s.members) {
      EXPECT_EQ(m.relative_orbit, s.key.relative_orbit);
      EXPECT_TRUE(seen.insert(m.vignette_id).second);
    }
  }
}

TEST(Stacks, OverlapThresholdSplitsGroups) {
  VignetteIndex idx;
  // Same track, two sites 0.12 deg apart (about 60% overlap) and one far away.
  idx.insert(make_record("x0", square(150.0, -27.0), t0()));
  idx.insert(make_record("x1", square(150.0, -27.0), add_seconds(t0(), 86400 * 12)));
  idx.insert(make_record("y0", square(150.08, -27.0), add_seconds(t0(), 86400 * 24)));
  idx.insert(make_record("z0", square(152.0, -27.0), add_seconds(t0(), 86400 * 36)));
  EXPECT_EQ(idx.discover_stacks(box_ring(149, -28, 153, -26), 0.5, 2)[0].members.size(), 3u);
  const auto strict = idx.discover_stacks(box_ring(149, -28, 153, -26), 0.9, 2);
  ASSERT_EQ(strict.size(), 1u);
  EXPECT_EQ(ids(strict[0].members), (std::vector<std::string>{"x0", "x1"}));
}

TEST(Stacks, SingleAcquisitionGivesNothing) {
  VignetteIndex idx;
  idx.insert(make_record("only", square(150.0, -27.0), t0()));
  EXPECT_TRUE(idx.discover_stacks(box_ring(149, -28, 151, -26), 0.5, 2).empty());
  EXPECT_THROW(idx.discover_stacks(box_ring(149, -28, 151, -26), 0.0, 2), Error);
  EXPECT_THROW(idx.discover_stacks(box_ring(149, -28, 151, -26), 0.5, 1), Error);
}

TEST(Coverage, EmptyIndexCountsZero) {
  VignetteIndex idx;
  const auto t = idx.coverage_stats({{"R1", box_ring(0, 0, 10, 10)}, {"R2", box_ring(20, 0, 30, 10)}});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].second, 0u);
  EXPECT_EQ(t.rows[1].second, 0u);
  EXPECT_EQ(t.total, 0u);
}

TEST(Coverage, ConstructedPlacement) {
  VignetteIndex idx;
  for (int i = 0; i < 100; ++i)
    idx.insert(make_record("r1_" + std::to_string(i), square(1.0 + 0.8 * (i % 10), 1.0 + 0.8 * (i / 10)), t0()));
  for (int i = 0; i < 50; ++i)
    idx.insert(make_record("r2_" + std::to_string(i), square(21.0 + 0.8 * (i % 10), 1.0 + 0.8 * (i / 10)), t0()));
  for (int i = 0; i < 7; ++i)
    idx.insert(make_record("far_" + std::to_string(i), square(-100.0 + i, 40.0), t0()));
  const auto t = idx.coverage_stats({{"R1", box_ring(0, 0, 10, 10)}, {"R2", box_ring(20, 0, 30, 10)}});
  EXPECT_EQ(t.rows[0], (std::pair<std::string, std::size_t>{"R1", 100}));
  EXPECT_EQ(t.rows[1], (std::pair<std::string, std::size_t>{"R2", 50}));
  EXPECT_EQ(t.total, 150u);
}

TEST(Coverage, OverlappingRegionsCountTwiceAndMatchBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lon(-30.0, 30.0), lat(-20.0, 20.0);
  VignetteIndex idx;
  std::vector<Ring> fps;
  for (int i = 0; i < 1500; ++i) {
    fps.push_back(square(lon(rng), lat(rng), 22.0, 15.0 * (i % 5)));
    idx.insert(make_record("c" + std::to_string(i), fps.back(), add_seconds(t0(), i)));
  }
  const std::vector<NamedRegion> regions{{"west", box_ring(-30, -20, 5, 20)},
                                         {"east", box_ring(-5, -20, 30, 20)},
                                         {"wedge", {{-10, -10}, {15, -5}, {0, 18}}}};
  const auto t = idx.coverage_stats(regions);
  std::size_t sum = 0;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    std::size_t n = 0;
    for (const auto& fp : fps) n += oracle_intersects(fp, regions[k].polygon);
    EXPECT_EQ(t.rows[k].second, n) << regions[k].name;
    sum += n;
  }
  EXPECT_EQ(t.total, sum);
  EXPECT_GT(t.total, fps.size());
}
