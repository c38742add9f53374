#include <gtest/gtest.h>

#include <random>

#include "test_scenes.hpp"
#include "wvstack/geometry/geocode.hpp"
#include "wvstack/geometry/map_grid.hpp"
#include "wvstack/geometry/zero_doppler.hpp"

using namespace wvstack;
using namespace wvstack::testing;

// ---------------------------------------------------------------- orbit

TEST(Orbit, ExactAtKnots) {
  const OrbitModel orbit = test_orbit();
  for (const auto& sv : orbit.state_vectors()) {
    const OrbitState s = orbit.state(sv.t);
    EXPECT_EQ(s.position, sv.position);
    EXPECT_EQ(s.velocity, sv.velocity);
  }
}

TEST(Orbit, MatchesAnalyticCircleBetweenKnots) {
  const auto circle = descending_orbit();
  const OrbitModel orbit = circle.sample(test_epoch(), -60, 60, 10.0);
  double max_pos = 0, max_vel = 0;
  for (double t = -59.9; t < 60; t += 0.37) {
    const OrbitState s = orbit.state(t);
    max_pos = std::max(max_pos, (s.position - circle.position(t)).norm());
    max_vel = std::max(max_vel, (s.velocity - circle.velocity(t)).norm());
  }
  EXPECT_LT(max_pos, 1e-3);
  EXPECT_LT(max_vel, 1e-3);
}

TEST(Orbit, TimeOutOfRange) {
  const OrbitModel orbit = test_orbit();
  try {
    orbit.state(61.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TimeOutOfRange);
  }
}

TEST(Orbit, RejectsInvalidStateVectorSets) {
  const auto circle = descending_orbit();
  auto sv = [&](double t) { return StateVector{t, circle.position(t), circle.velocity(t)}; };
  EXPECT_THROW(OrbitModel(test_epoch(), {sv(0), sv(10), sv(20)}), Error);
  EXPECT_THROW(OrbitModel(test_epoch(), {sv(0), sv(10), sv(10), sv(20)}), Error);
  EXPECT_THROW(OrbitModel(test_epoch(), {sv(0), sv(10), sv(50), sv(60)}), Error);
  EXPECT_NO_THROW(OrbitModel(test_epoch(), {sv(0), sv(10), sv(20), sv(30)}));
}

TEST(Orbit, JsonRoundTrip) {
  const OrbitModel orbit = test_orbit();
  const OrbitModel back = OrbitModel::from_json(json::parse(orbit.to_json().dump()));
  EXPECT_EQ(back.epoch(), orbit.epoch());
  ASSERT_EQ(back.state_vectors().size(), orbit.state_vectors().size());
  for (std::size_t i = 0; i < back.state_vectors().size(); ++i)
    EXPECT_EQ(back.state_vectors()[i].position, orbit.state_vectors()[i].position);
}

// ---------------------------------------------------------------- zero Doppler

namespace {
// Point in the plane normal to the orbit velocity at t0, at look angle `look` to the right.
Vec3 point_on_zero_doppler_plane(double t0, double range, double look_deg) {
  const OrbitState s = test_orbit().state(t0);
  const Vec3 p = s.position, v = s.velocity.normalized();
  const Vec3 up = (p - p.dot(v) * v).normalized();
  const Vec3 right = v.cross(up);
  return p + range * (-std::cos(deg2rad(look_deg)) * up + std::sin(deg2rad(look_deg)) * right);
}
}  // namespace

TEST(ZeroDoppler, RecoversConstructedTime) {
  const OrbitModel orbit = test_orbit();
  for (double t0 : {-20.0, -3.3, 0.0, 7.25, 31.0}) {
    const Vec3 x = point_on_zero_doppler_plane(t0, 780e3, 22.0);
    const auto sol = zero_doppler_solve(orbit, x, 0.0);
    EXPECT_NEAR(sol.t_az, t0, 1e-8);
    EXPECT_NEAR(sol.slant_range, 780e3, 1e-3);
  }
}

TEST(ZeroDoppler, BasinStable) {
  const OrbitModel orbit = test_orbit();
  const Vec3 x = point_on_zero_doppler_plane(4.0, 800e3, 30.0);
  const double ref = zero_doppler_solve(orbit, x, 4.0).t_az;
  EXPECT_NEAR(zero_doppler_solve(orbit, x, 2.0).t_az, ref, 1e-9);
  EXPECT_NEAR(zero_doppler_solve(orbit, x, 6.0).t_az, ref, 1e-9);
}

TEST(ZeroDoppler, NadirAtEquatorCrossing) {
  auto c = descending_orbit();
  c.u0_deg = 180.0;  // descending node at t = 0
  const OrbitModel orbit = c.sample(test_epoch(), -60, 60);
  const Vec3 p = c.position(0.0);
  const Vec3 nadir = p.normalized() * wgs84::a;
  const auto sol = zero_doppler_solve(orbit, nadir, 1.5);
  EXPECT_NEAR(sol.t_az, 0.0, 1e-8);
  EXPECT_NEAR(sol.slant_range, c.altitude, 1e-3);
  const auto hi = heading_incidence_at(orbit.state(sol.t_az), nadir);
  EXPECT_NEAR(hi.incidence_deg, 0.0, 1e-6);
}

TEST(ZeroDoppler, NoConvergenceWithTinyBudget) {
  const OrbitModel orbit = test_orbit();
  const Vec3 x = point_on_zero_doppler_plane(20.0, 800e3, 30.0);
  EXPECT_THROW(zero_doppler_solve(orbit, x, -20.0, {1e-10, 1}), Error);
}

TEST(RadarToGround, RoundTripAcrossScene) {
  const OrbitModel orbit = test_orbit();
  for (Beam beam : {Beam::WV1, Beam::WV2}) {
    const RadarGeometry g = test_geometry(orbit, beam, 4800, 5300);
    double worst_line = 0, worst_sample = 0;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double line = (i + 0.31) * (static_cast<double>(g.n_lines) - 1) / 20.0;
        const double sample = (j + 0.77) * (static_cast<double>(g.n_samples) - 1) / 20.0;
        const Vec3 x = radar_to_ground(g, orbit, line, sample, 120.0);
        EXPECT_NEAR(inflated_ellipsoid(x, 120.0), 0.0, 1e-12);
        const auto rc = ground_to_radar(g, orbit, x, g.mid_time());
        worst_line = std::max(worst_line, std::abs(rc.line - line));
        worst_sample = std::max(worst_sample, std::abs(rc.sample - sample));
      }
    EXPECT_LT(worst_line, 1e-6);
    EXPECT_LT(worst_sample, 1e-4);
  }
}

TEST(RadarToGround, NoIntersectionBelowAltitude) {
  const OrbitModel orbit = test_orbit();
  EXPECT_THROW(range_doppler_to_ground(orbit, 0.0, 100e3, 0.0), Error);
}

TEST(RadarToGround, MidSwathIncidenceInsideBeamEnvelope) {
  const OrbitModel orbit = test_orbit();
  for (Beam beam : {Beam::WV1, Beam::WV2}) {
    const RadarGeometry g = test_geometry(orbit, beam, 4800, 5300);
    const Vec3 mid = radar_to_ground(g, orbit, 2400, 2650, 0.0);
    const auto hi = heading_incidence(orbit, g, mid);
    EXPECT_TRUE(sensor::incidence_envelope(beam).contains(hi.incidence_deg)) << hi.incidence_deg;
    const double look = look_angle(orbit, g.mid_time(), mid);
    EXPECT_TRUE(sensor::look_envelope(beam).contains(look)) << look;
  }
}

TEST(HeadingIncidence, DescendingNodeHeading) {
  auto c = descending_orbit();
  c.u0_deg = 180.0;
  const OrbitModel orbit = c.sample(test_epoch(), -60, 60);
  const RadarGeometry g = sim::design_geometry(orbit, 0.0, Beam::WV1, 512, 512);
  const Vec3 x = radar_to_ground(g, orbit, 256, 256, 0.0);
  const auto hi = heading_incidence(orbit, g, x);
  // Non-rotating Earth: the ground track crosses the equator at azimuth 90 + inclination.
  EXPECT_NEAR(hi.heading_deg, 90.0 + c.inclination_deg, 0.5);
}

TEST(GroundSpeed, MatchesAngularRateTimesRadius) {
  const auto c = descending_orbit();
  const OrbitModel orbit = test_orbit();
  const RadarGeometry g = test_geometry(orbit, Beam::WV1);
  const Vec3 x = radar_to_ground(g, orbit, 256, 256, 0.0);
  // The zero-Doppler plane rotates about the orbit normal at the mean motion.
  const Vec3 n = c.normal();
  const double expected = c.mean_motion() * (x - x.dot(n) * n).norm();
  EXPECT_NEAR(ground_speed(orbit, g, x, 0.0), expected, 1e-3 * expected);
}

// ---------------------------------------------------------------- map frame

TEST(LocalFrame, RoundTripAndScale) {
  const LocalFrame f(150.3, -27.2);
  for (double e : {-9000.0, 0.0, 7300.0})
    for (double n : {-8000.0, 10.0, 9500.0}) {
      const Vec3 x = f.to_ecef(e, n, 35.0);
      EXPECT_NEAR(inflated_ellipsoid(x, 35.0), 0.0, 1e-13);
      const auto m = f.to_map(x);
      EXPECT_NEAR(m[0], e, 1e-6);
      EXPECT_NEAR(m[1], n, 1e-6);
    }
  // 10 km east on the surface is 10 km in the map to within orthographic scale error.
  EXPECT_NEAR((f.to_ecef(10000, 0) - f.to_ecef(0, 0)).norm(), 10000.0, 0.5);
  EXPECT_NEAR((f.to_ecef(0, -10000) - f.to_ecef(0, 0)).norm(), 10000.0, 0.5);
}

TEST(MapGrid, CoveringSnapsToPosting) {
  const MapGrid g = MapGrid::covering(LocalFrame(1, 2), 2.5, -101.0, 99.0, -50.2, 51.0);
  EXPECT_DOUBLE_EQ(g.east0, -100.0);
  EXPECT_DOUBLE_EQ(g.north0, 50.0);
  EXPECT_EQ(g.n_east, 80u);
  EXPECT_EQ(g.n_north, 41u);
  EXPECT_EQ(MapGrid::from_json(json::parse(g.to_json().dump())), g);
}

// ---------------------------------------------------------------- geocode

namespace {

struct Scene {
  OrbitModel orbit = test_orbit();
  RadarGeometry geom = test_geometry(orbit, Beam::WV1, 400, 400);
  MapGrid grid;
  Scene() {
    const Vec3 c = radar_to_ground(geom, orbit, 200, 200, 0.0);
    const Geodetic gc = ecef_to_geodetic(c);
    grid = MapGrid::covering(LocalFrame(gc.lon_deg, gc.lat_deg), 2.5, -400, 400, -400, 400);
  }
};

/// Cells at least `margin` cells away from any masked cell.
std::vector<std::pair<std::size_t, std::size_t>> interior(const GeocodedRaster& r, int margin) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const long rows = static_cast<long>(r.grid.n_north), cols = static_cast<long>(r.grid.n_east);
  for (long i = margin; i < rows - margin; ++i)
    for (long j = margin; j < cols - margin; ++j) {
      bool ok = true;
      for (long di = -margin; di <= margin && ok; di += margin)
        for (long dj = -margin; dj <= margin && ok; dj += margin)
          ok = r.valid(static_cast<std::size_t>(i + di), static_cast<std::size_t>(j + dj));
      if (ok) out.emplace_back(i, j);
    }
  return out;
}

Raster<cfloat> smooth_speckle(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n01;
  Raster<cfloat> white(rows, cols);
  for (auto& v : white.values()) v = cfloat(n01(rng), n01(rng));
  // 3-tap binomial smoothing in both directions keeps the content well below Nyquist.
  Raster<cfloat> out(rows, cols);
  for (std::size_t i = 1; i + 1 < rows; ++i)
    for (std::size_t j = 1; j + 1 < cols; ++j) {
      cfloat acc{};
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          acc += white(i + a, j + b) * static_cast<float>((a == 0 ? 2 : 1) * (b == 0 ? 2 : 1));
      out(i, j) = acc / 16.0f;
    }
  return out;
}

}  // namespace

TEST(Geocode, ConstantFieldPreserved) {
  Scene s;
  Raster<cfloat> slc(s.geom.n_lines, s.geom.n_samples, std::polar(2.0f, 0.7f));
  const auto out = geocode(slc, s.geom, s.orbit, s.grid);
  const auto cells = interior(out, 6);
  ASSERT_GT(cells.size(), 1000u);
  for (auto [i, j] : cells) {
    EXPECT_NEAR(std::abs(out.samples(i, j)), 2.0, 0.01);
    EXPECT_NEAR(std::arg(out.samples(i, j)), 0.7, 1e-5);
  }
}

TEST(Geocode, SlantRangePhaseRampProjectsOntoMap) {
  Scene s;
  const double k = 0.3;  // rad / sample
  Raster<cfloat> slc(s.geom.n_lines, s.geom.n_samples);
  for (std::size_t i = 0; i < slc.rows(); ++i)
    for (std::size_t j = 0; j < slc.cols(); ++j) slc(i, j) = std::polar(1.0f, static_cast<float>(k * static_cast<double>(j)));
  const auto out = geocode(slc, s.geom, s.orbit, s.grid);

  // Analytic projection: d(phase)/d(ground range) = k sin(inc) / range_spacing along
  // the right-looking ground-range direction (cos h, -sin h).
  const Vec3 centre = s.grid.frame.to_ecef(0, 0);
  const auto sol = zero_doppler_solve(s.orbit, centre, 0.0);
  const auto circle = descending_orbit();
  const auto hi = heading_incidence_at({circle.position(sol.t_az), circle.velocity(sol.t_az), Vec3::Zero()}, centre);
  const double slope = k * std::sin(deg2rad(hi.incidence_deg)) / s.geom.range_spacing;
  const double de = slope * std::cos(deg2rad(hi.heading_deg)), dn = -slope * std::sin(deg2rad(hi.heading_deg));

  std::complex<double> ge{}, gn{};
  const std::size_t c0 = s.grid.n_east / 2, r0 = s.grid.n_north / 2;
  for (std::size_t i = r0 - 20; i < r0 + 20; ++i)
    for (std::size_t j = c0 - 20; j < c0 + 20; ++j) {
      const auto z = std::complex<double>(out.samples(i, j));
      ge += std::complex<double>(out.samples(i, j + 1)) * std::conj(z);
      gn += z * std::conj(std::complex<double>(out.samples(i + 1, j)));  // row + 1 is one posting south
    }
  EXPECT_NEAR(std::arg(ge) / s.grid.posting, de, 0.01 * slope);
  EXPECT_NEAR(std::arg(gn) / s.grid.posting, dn, 0.01 * slope);
}

TEST(Geocode, PreservesEnergyOfExtendedScene) {
  Scene s;
  const auto slc = smooth_speckle(s.geom.n_lines, s.geom.n_samples, 7);
  double e_in = 0;
  std::size_t n_in = 0;
  for (std::size_t i = 10; i + 10 < slc.rows(); ++i)
    for (std::size_t j = 10; j + 10 < slc.cols(); ++j, ++n_in) e_in += std::norm(slc(i, j));
  const auto out = geocode(slc, s.geom, s.orbit, s.grid);
  double e_out = 0;
  const auto cells = interior(out, 8);
  for (auto [i, j] : cells) e_out += std::norm(out.samples(i, j));
  EXPECT_NEAR((e_out / static_cast<double>(cells.size())) / (e_in / static_cast<double>(n_in)), 1.0, 0.01);
}

TEST(Geocode, DeterministicAcrossRunsAndThreadCounts) {
  Scene s;
  const auto slc = smooth_speckle(s.geom.n_lines, s.geom.n_samples, 3);
  const auto a = geocode(slc, s.geom, s.orbit, s.grid);
  GeocodeOptions opt;
  opt.jobs = 3;
  const auto b = geocode(slc, s.geom, s.orbit, s.grid, opt);
  EXPECT_TRUE(a.samples == b.samples);
  EXPECT_TRUE(a.mask == b.mask);
}

TEST(Geocode, GridDisjoint) {
  Scene s;
  MapGrid far = s.grid;
  far.east0 += 200e3;
  Raster<cfloat> slc(s.geom.n_lines, s.geom.n_samples, cfloat(1, 0));
  try {
    geocode(slc, s.geom, s.orbit, far);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GridDisjoint);
  }
}
