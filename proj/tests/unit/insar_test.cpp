#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wvstack/insar/workflow.hpp"
#include "wvstack/simulator/dataset.hpp"

using namespace wvstack;

namespace {

GeocodedRaster random_raster(std::size_t n, std::uint64_t seed, double posting = 2.5) {
  MapGrid g;
  g.posting = posting;
  g.n_east = g.n_north = n;
  GeocodedRaster r(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.f, float(std::sqrt(0.5)));
  for (auto& z : r.samples.values()) z = cfloat(d(rng), d(rng));
  std::fill(r.mask.values().begin(), r.mask.values().end(), 1);
  return r;
}

Interferogram constant_ifg(std::size_t n, std::size_t a, std::size_t b, double phase, float coherence = 0.9f) {
  Interferogram i;
  i.epoch_a = a;
  i.epoch_b = b;
  i.grid.n_east = i.grid.n_north = n;
  i.samples = Raster<cfloat>(n, n, std::polar(coherence, float(phase)));
  i.coherence = Raster<float>(n, n, coherence);
  i.mask = Mask(n, n, 1);
  return i;
}

std::vector<UtcTime> epochs_every(std::size_t n, double days) {
  std::vector<UtcTime> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(add_seconds(parse_utc("2023-01-05T06:00:00Z"), days * 86400.0 * double(k)));
  return out;
}

double fitted_rate_mm_per_year(const DeformationSeries& s) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(s.epochs.size());
  for (std::size_t k = 0; k < s.epochs.size(); ++k) {
    const double x = days_between(s.epochs.front(), s.epochs[k]) / 365.25;
    sx += x, sy += s.los_mm[k], sxx += x * x, sxy += x * s.los_mm[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Renders every epoch of slot 0 and geocodes it with the true geometry onto a
// square grid of half-width `half` around the site origin.
std::vector<GeocodedRaster> rendered_epochs(const sim::SimulationSpec& s, double half, std::vector<UtcTime>& epochs) {
  const auto plan = sim::synth_plan(s);
  std::vector<const sim::PlannedVignette*> members;
  for (const auto& v : plan)
    if (v.slot == 0) members.push_back(&v);
  const auto site = sim::build_site(s, members);
  const auto grid = MapGrid::covering(site.frame, 2.5, -half, half, -half, half);
  std::vector<GeocodedRaster> out;
  for (const auto* v : members) {
    out.push_back(geocode(sim::synth_slc(s, site, *v), v->geometry, v->orbit, grid));
    epochs.push_back(v->record.sensing_start);
  }
  return out;
}

std::vector<Interferogram> sbas(const std::vector<GeocodedRaster>& looks, const std::vector<UtcTime>& epochs) {
  std::vector<Interferogram> out;
  for (const auto& [a, b] : sbas_pairs(epochs)) {
    out.push_back(form_interferogram(looks[a], looks[b]));
    out.back().epoch_a = a;
    out.back().epoch_b = b;
  }
  return out;
}

}  // namespace

TEST(Downsample, IdentityAndPosting) {
  const auto r = random_raster(10, 1);
  const auto same = downsample_grid(r, 1);
  EXPECT_EQ(same.samples, r.samples);
  const auto half = downsample_grid(r, 2);
  EXPECT_DOUBLE_EQ(half.grid.posting, 5.0);
  EXPECT_EQ(half.grid.n_east, 5u);
  EXPECT_DOUBLE_EQ(half.grid.east0, r.grid.east0 + 1.25);
  EXPECT_DOUBLE_EQ(half.grid.north0, r.grid.north0 - 1.25);
  const std::complex<double> mean =
      (std::complex<double>(r.samples(0, 0)) + std::complex<double>(r.samples(0, 1)) + std::complex<double>(r.samples(1, 0)) +
       std::complex<double>(r.samples(1, 1))) / 4.0;
  EXPECT_NEAR(half.samples(0, 0).real(), mean.real(), 1e-6);
  EXPECT_NEAR(half.samples(0, 0).imag(), mean.imag(), 1e-6);
  EXPECT_THROW(downsample_grid(r, 0), Error);
}

TEST(Downsample, ConstantPhaseAndMaskRule) {
  auto r = random_raster(9, 2);
  for (auto& z : r.samples.values()) z = std::polar(1.0f + std::abs(z), 0.7f);
  r.mask(0, 0) = 0;                   // block (0,0): 3 of 4 valid
  r.mask(2, 2) = r.mask(2, 3) = 0;    // block (1,1): 2 of 4 valid -> still valid
  r.mask(3, 2) = 0;
  const auto d = downsample_grid(r, 2);
  EXPECT_EQ(d.grid.n_east, 5u);  // padded edge block
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    if (d.mask.values()[i]) EXPECT_NEAR(std::arg(d.samples.values()[i]), 0.7, 1e-6);
  EXPECT_TRUE(d.mask(0, 0));
  EXPECT_FALSE(d.mask(1, 1));  // 1 of 4
  EXPECT_TRUE(d.mask(4, 0));   // edge block: 2 real cells of 4
  EXPECT_FALSE(d.mask(4, 4));  // corner: 1 real cell of 4
}

TEST(Interferogram, IdentityAndPhaseOffset) {
  const auto a = random_raster(40, 3);
  auto ifg = form_interferogram(a, a);
  EXPECT_EQ(ifg.mask.values().size() - std::size_t(std::count(ifg.mask.values().begin(), ifg.mask.values().end(), 0)),
            40u * 40u - 12u);  // three clipped cells per corner fall below half a window
  for (std::size_t i = 0; i < ifg.mask.size(); ++i) {
    if (!ifg.mask.values()[i]) continue;
    EXPECT_NEAR(ifg.coherence.values()[i], 1.0, 1e-6);
    EXPECT_NEAR(std::arg(ifg.samples.values()[i]), 0.0, 1e-6);
  }
  auto b = a;
  for (auto& z : b.samples.values()) z *= std::polar(1.0f, -1.1f);
  ifg = form_interferogram(a, b);
  for (std::size_t i = 0; i < ifg.mask.size(); ++i) {
    if (!ifg.mask.values()[i]) continue;
    EXPECT_NEAR(ifg.coherence.values()[i], 1.0, 1e-5);
    EXPECT_NEAR(std::arg(ifg.samples.values()[i]), 1.1, 1e-5);
  }
  auto c = a;
  c.grid.east0 += 2.5;
  try {
    form_interferogram(a, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GridMismatch);
  }
}

TEST(Interferogram, CoherenceMatchesSnrRelation) {
  // a = s + n1, b = s + n2 with unit-power s: gamma = 1 / (1 + 1/snr).
  for (double snr : {1.0, 2.0, 4.0, 9.0}) {
    const auto s = random_raster(200, 10);
    auto a = s, b = s;
    const auto n1 = random_raster(200, 11), n2 = random_raster(200, 12);
    const float k = float(std::sqrt(1.0 / snr));
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      a.samples.values()[i] += k * n1.samples.values()[i];
      b.samples.values()[i] += k * n2.samples.values()[i];
    }
    const auto ifg = form_interferogram(a, b);
    double sum = 0;
    for (auto g : ifg.coherence.values()) {
      ASSERT_GE(g, 0.f);
      ASSERT_LE(g, 1.f);
      sum += g;
    }
    EXPECT_NEAR(sum / double(ifg.coherence.size()), 1.0 / (1.0 + 1.0 / snr), 0.03) << snr;
  }
}

TEST(Interferogram, EdgeAndMaskedCells) {
  auto a = random_raster(20, 4);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 10; c < 20; ++c) a.mask(r, c) = 0;
  const auto ifg = form_interferogram(a, a);
  EXPECT_FALSE(ifg.mask(0, 0));   // 9 of 25 in the corner window
  EXPECT_TRUE(ifg.mask(0, 2));    // 15 of 25
  EXPECT_FALSE(ifg.mask(10, 10));
  EXPECT_TRUE(ifg.mask(10, 9));   // 15 of 25
  EXPECT_FALSE(ifg.mask(0, 9));   // 9 of 25
}

TEST(SelectPoints, DegenerateCutoffsAndMonotone) {
  EXPECT_THROW(select_points({}, 0.5), Error);
  std::vector<Interferogram> ifgs{form_interferogram(random_raster(30, 5), random_raster(30, 6))};
  const auto all = select_points(ifgs, 0.0);
  EXPECT_EQ(all.points.size(), all.valid_cells);
  EXPECT_EQ(all.points.size(), 900u - 12u);
  EXPECT_TRUE(select_points(ifgs, 1.0 + 1e-9).points.empty());
  std::size_t last = all.points.size();
  for (double c = 0.05; c <= 1.0; c += 0.05) {
    const auto s = select_points(ifgs, c);
    EXPECT_LE(s.points.size(), last);
    for (const auto& p : s.points) EXPECT_GE(p.coherence, c);
    last = s.points.size();
  }
}

TEST(SelectPoints, TwoRegionSceneFraction) {
  sim::SimulationSpec s;
  s.vignettes_per_pass = 1;
  // Six epochs: the mean over the SBAS pairs pulls the small-sample coherence
  // bias of the decorrelated ring well below the cutoff.
  s.repeat_count = 6;
  s.lines = 1024;
  s.samples = 1024;
  s.jitter_s = 0;
  s.regions.push_back({0.0, 0.0, 600.0, 5000.0, 0.0});  // decorrelated outside the core
  std::vector<UtcTime> epochs;
  auto rasters = rendered_epochs(s, 1000.0, epochs);
  std::vector<GeocodedRaster> looks;
  for (const auto& r : rasters) looks.push_back(downsample_grid(r, 2));
  const auto ifgs = sbas(looks, epochs);
  const auto set = select_points(ifgs, 0.5);
  std::size_t core = 0, valid = 0;
  const auto& g = looks.front().grid;
  for (std::size_t r = 0; r < g.n_north; ++r)
    for (std::size_t c = 0; c < g.n_east; ++c) {
      bool ok = true;
      for (const auto& i : ifgs) ok = ok && i.mask(r, c);
      if (!ok) continue;
      ++valid;
      core += std::hypot(g.east(double(c)), g.north(double(r))) < 600.0;
    }
  ASSERT_EQ(valid, set.valid_cells);
  EXPECT_NEAR(set.selected_fraction(), double(core) / double(valid), 0.02);
}

TEST(TimeSeries, PhaseToMillimetres) {
  EXPECT_NEAR(mm_per_radian(), 55.466 / (4.0 * std::numbers::pi), 1e-9);
  EXPECT_NEAR(mm_per_radian(), 4.414, 5e-4);
}

TEST(TimeSeries, ZeroPhaseGivesZeroDeformation) {
  const auto epochs = epochs_every(5, 12.0);
  std::vector<Interferogram> ifgs;
  for (const auto& [a, b] : sbas_pairs(epochs)) ifgs.push_back(constant_ifg(4, a, b, 0.0));
  const auto pts = select_points(ifgs, 0.0);
  const auto res = invert_time_series(ifgs, epochs, pts);
  ASSERT_EQ(res.series.size(), 16u);
  for (const auto& s : res.series) {
    ASSERT_EQ(s.los_mm.size(), 5u);
    EXPECT_EQ(s.los_mm[0], 0.0);
    for (std::size_t k = 1; k < 5; ++k) {
      EXPECT_NEAR(s.los_mm[k], 0.0, 1e-12);
      EXPECT_GT(s.sigma_mm[k], 0.0);
    }
  }
  for (const auto& c : cumulative_deformation(res.series)) EXPECT_EQ(c.cumulative_mm, 0.0);
}

TEST(TimeSeries, ConsistentNetworkIsExactAndLinear) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  const auto epochs = epochs_every(8, 12.0);
  std::vector<double> phi(8, 0.0);
  for (std::size_t k = 1; k < 8; ++k) phi[k] = phi[k - 1] + u(rng) * 0.5;
  std::vector<Interferogram> ifgs, doubled;
  for (const auto& [a, b] : sbas_pairs(epochs)) {
    std::uniform_real_distribution<double> g(0.3, 0.95);
    const float coh = float(g(rng));
    ifgs.push_back(constant_ifg(2, a, b, phi[a] - phi[b], coh));
    doubled.push_back(constant_ifg(2, a, b, 2 * (phi[a] - phi[b]), coh));
  }
  const auto pts = select_points(ifgs, 0.0);
  const auto one = invert_time_series(ifgs, epochs, pts);
  const auto two = invert_time_series(doubled, epochs, pts);
  ASSERT_EQ(one.series.size(), 4u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_NEAR(one.series[0].los_mm[k], phi[k] * mm_per_radian(), 1e-5);
    EXPECT_NEAR(two.series[0].los_mm[k], 2.0 * one.series[0].los_mm[k], 1e-5);
  }
  const auto cum = cumulative_deformation(one.series);
  EXPECT_EQ(cum.size(), pts.points.size());
  EXPECT_DOUBLE_EQ(cum[0].cumulative_mm, one.series[0].los_mm.back());
}

TEST(TimeSeries, DisconnectedAndWrapGuard) {
  const auto epochs = epochs_every(6, 40.0);  // only neighbours within 48 days
  std::vector<Interferogram> ifgs;
  for (const auto& [a, b] : sbas_pairs(epochs))
    if (!(a == 2 && b == 3)) ifgs.push_back(constant_ifg(2, a, b, 0.0));
  try {
    invert_time_series(ifgs, epochs, select_points(ifgs, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DisconnectedEpochs);
  }
  // Deformation of 2 rad per step: the long pair (-4 rad) wraps to 2.28 rad and
  // the triangle no longer closes.
  const auto tri = epochs_every(3, 12.0);
  const double wrapped = std::arg(std::polar(1.0, -4.0));
  std::vector<Interferogram> t{constant_ifg(2, 0, 1, -2.0), constant_ifg(2, 1, 2, -2.0), constant_ifg(2, 0, 2, wrapped)};
  const auto res = invert_time_series(t, tri, select_points(t, 0.0));
  EXPECT_TRUE(res.series.empty());
  EXPECT_EQ(res.dropped.size(), 4u);
}

TEST(TimeSeries, SimulatedLinearSubsidence) {
  for (double coherence : {1.0, 0.8}) {
    sim::SimulationSpec s;
    s.vignettes_per_pass = 1;
    s.repeat_count = 12;
    s.lines = 512;
    s.samples = 512;
    s.jitter_s = 0;
    s.base_coherence = coherence;
    s.deformation.kind = sim::DeformationModel::Kind::Uniform;
    s.deformation.rate_mm_per_year = 30.0;
    std::vector<UtcTime> epochs;
    auto rasters = rendered_epochs(s, 300.0, epochs);
    std::vector<GeocodedRaster> looks;
    for (const auto& r : rasters) looks.push_back(downsample_grid(r, 2));
    const auto ifgs = sbas(looks, epochs);
    const auto pts = select_points(ifgs, 0.5);
    ASSERT_FALSE(pts.points.empty());
    const auto res = invert_time_series(ifgs, epochs, pts);
    ASSERT_FALSE(res.series.empty());
    double mean_rate = 0;
    for (const auto& ser : res.series) mean_rate += fitted_rate_mm_per_year(ser);
    mean_rate /= double(res.series.size());
    EXPECT_NEAR(mean_rate, 30.0, coherence == 1.0 ? 1.0 : 5.0) << coherence;
    if (coherence == 1.0) EXPECT_NEAR(fitted_rate_mm_per_year(res.series.front()), 30.0, 1.0);
  }
}
