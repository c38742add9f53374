#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "wvstack/insar/timeseries.hpp"
#include "wvstack/stack/manifest.hpp"

namespace wvstack {

struct TimeSeriesParams {
  double analysis_posting = 5.0;
  int looks = 5;
  double cutoff = 0.5;
  double max_baseline_days = 48.0;
  std::size_t series_limit = 25;  // per-point series files written
  TimeSeriesOptions inversion{};
  int jobs = 1;
};

struct TimeSeriesOutput {
  MapGrid grid;  // analysis grid
  std::vector<UtcTime> epochs;
  std::vector<std::string> members;
  std::vector<EpochPair> pairs;
  std::vector<double> pair_coherence;  // mean over valid cells
  CoherencePointSet points;
  TimeSeriesResult result;
  std::vector<CumulativePoint> cumulative;
};

/// Multilook the stack to the analysis grid, form the small-baseline network,
/// select points and invert. When `out_dir` is non-empty writes
///   points.csv, pairs.csv, deformation_map.png,
///   series/point_<row>_<col>.{csv,png} for an evenly strided sample of points.
inline TimeSeriesOutput run_time_series(const StackManifest& stack, const std::filesystem::path& stack_dir,
                                        const std::filesystem::path& out_dir, const TimeSeriesParams& p = {}) {
  const double ratio = p.analysis_posting / stack.grid.posting;
  const int factor = int(std::lround(ratio));
  if (factor < 1 || std::abs(ratio - factor) > 1e-9)
    throw Error(Errc::Usage, "analysis posting must be an integer multiple of the stack posting");
  if (stack.members.size() < 2) throw Error(Errc::EmptyStack, "stack " + stack.stack_id + " has fewer than two members");

  TimeSeriesOutput out;
  std::vector<GeocodedRaster> looks(stack.members.size());
  for (std::size_t i = 0; i < stack.members.size(); ++i) {
    looks[i] = downsample_grid(GeocodedRaster::load(stack_dir / stack.members[i].raster), factor);
    out.epochs.push_back(stack.members[i].sensing_start);
    out.members.push_back(stack.members[i].vignette_id);
  }
  out.grid = looks.front().grid;
  out.pairs = sbas_pairs(out.epochs, p.max_baseline_days);

  std::vector<Interferogram> ifgs(out.pairs.size());
  parallel_for(out.pairs.size(), p.jobs, [&](std::size_t k) {
    const auto [a, b] = out.pairs[k];
    ifgs[k] = form_interferogram(looks[a], looks[b], p.looks);
    ifgs[k].member_a = out.members[a];
    ifgs[k].member_b = out.members[b];
    ifgs[k].epoch_a = a;
    ifgs[k].epoch_b = b;
    ifgs[k].temporal_baseline = days_between(out.epochs[a], out.epochs[b]);
  });
  looks.clear();
  for (const auto& i : ifgs) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < i.mask.size(); ++c)
      if (i.mask.values()[c]) sum += i.coherence.values()[c], ++n;
    out.pair_coherence.push_back(n ? sum / double(n) : 0.0);
  }

  out.points = select_points(ifgs, p.cutoff);
  auto inv = p.inversion;
  inv.jobs = p.jobs;
  out.result = invert_time_series(ifgs, out.epochs, out.points, inv);
  out.cumulative = cumulative_deformation(out.result.series);

  if (!out_dir.empty()) {
    write_points_csv(out_dir / "points.csv", out.cumulative);
    std::string pairs = "member_a,member_b,baseline_days,mean_coherence\n";
    char buf[64];
    for (std::size_t k = 0; k < ifgs.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.3f,%.4f\n", ifgs[k].temporal_baseline, out.pair_coherence[k]);
      pairs += ifgs[k].member_a + "," + ifgs[k].member_b + buf;
    }
    write_text(out_dir / "pairs.csv", pairs);
    write_deformation_map(out_dir / "deformation_map.png", out.grid, out.cumulative);
    const auto& series = out.result.series;
    if (p.series_limit > 0 && !series.empty()) {
      const std::size_t stride = (series.size() + p.series_limit - 1) / p.series_limit;
      for (std::size_t k = 0; k < series.size(); k += stride) {
        const auto& s = series[k];
        const std::string stem = "point_" + std::to_string(s.point.row) + "_" + std::to_string(s.point.col);
        write_series_csv(out_dir / "series" / (stem + ".csv"), s);
        write_series_plot(out_dir / "series" / (stem + ".png"), s);
      }
    }
  }
  return out;
}

}  // namespace wvstack
