#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "wvstack/core/parallel.hpp"
#include "wvstack/core/png.hpp"
#include "wvstack/core/time.hpp"
#include "wvstack/geometry/sensor.hpp"
#include "wvstack/insar/interferogram.hpp"

namespace wvstack {

/// LOS millimetres per radian of interferometric phase.
inline double mm_per_radian(double wavelength = sensor::wavelength) {
  return wavelength * 1000.0 / (4.0 * std::numbers::pi);
}

struct EpochPair {
  std::size_t a, b;  // a < b
  bool operator==(const EpochPair&) const = default;
};

/// Small-baseline subset: every pair of epochs at most `max_days` apart.
inline std::vector<EpochPair> sbas_pairs(const std::vector<UtcTime>& epochs, double max_days = 48.0) {
  std::vector<EpochPair> out;
  for (std::size_t i = 0; i < epochs.size(); ++i)
    for (std::size_t j = i + 1; j < epochs.size(); ++j)
      if (std::abs(days_between(epochs[i], epochs[j])) <= max_days + 1e-9) out.push_back({i, j});
  return out;
}

struct PointCell {
  std::size_t row = 0, col = 0;
  double coherence = 0;  // mean over the interferograms
};

struct CoherencePointSet {
  std::vector<PointCell> points;
  double cutoff = 0;
  std::size_t valid_cells = 0;  // valid in every interferogram
  double selected_fraction() const { return valid_cells ? double(points.size()) / double(valid_cells) : 0.0; }
};

/// Cells valid in every interferogram whose mean coherence reaches `cutoff`.
inline CoherencePointSet select_points(const std::vector<Interferogram>& ifgs, double cutoff) {
  if (ifgs.empty()) throw Error(Errc::EmptyStack, "no interferograms to select points from");
  for (const auto& i : ifgs)
    if (!(i.grid == ifgs.front().grid)) throw Error(Errc::GridMismatch, "coherence rasters are on different grids");
  CoherencePointSet set;
  set.cutoff = cutoff;
  const auto& g = ifgs.front().grid;
  for (std::size_t r = 0; r < g.n_north; ++r)
    for (std::size_t c = 0; c < g.n_east; ++c) {
      double sum = 0;
      bool valid = true;
      for (const auto& i : ifgs) {
        if (!i.mask(r, c)) {
          valid = false;
          break;
        }
        sum += i.coherence(r, c);
      }
      if (!valid) continue;
      ++set.valid_cells;
      const double mean = sum / double(ifgs.size());
      if (mean >= cutoff) set.points.push_back({r, c, mean});
    }
  return set;
}

struct DeformationSeries {
  PointCell point;
  double east = 0, north = 0;
  std::vector<UtcTime> epochs;
  std::vector<double> los_mm;    // relative to the first epoch
  std::vector<double> sigma_mm;  // 1-sigma
};

struct TimeSeriesOptions {
  double max_coherence = 0.999;         // caps the phase weight of near-perfect pairs
  double wrap_guard = std::numbers::pi / 2;  // pair residual (rad) that marks a wrap violation
  int jobs = 1;
};

struct TimeSeriesResult {
  std::vector<DeformationSeries> series;
  std::vector<PointCell> dropped;  // failed the wrap guard
};

/// Phase variance of a `looks`-look interferogram at coherence `gamma`.
inline double phase_variance(double gamma, int looks) {
  return (1.0 - gamma * gamma) / (2.0 * double(looks) * gamma * gamma);
}

/// Weighted least squares per point for epoch phases with epoch 0 fixed at
/// zero. Interferogram phase arg(a conj b) equals phi_a - phi_b. Weights are
/// inverse phase variances from each pair's coherence; sigma comes from the
/// diagonal of (A^T W A)^-1.
inline TimeSeriesResult invert_time_series(const std::vector<Interferogram>& ifgs, const std::vector<UtcTime>& epochs,
                                           const CoherencePointSet& points, const TimeSeriesOptions& opt = {}) {
  const std::size_t n = epochs.size();
  if (n < 2 || ifgs.empty()) throw Error(Errc::EmptyStack, "time series needs at least two epochs and one interferogram");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& i : ifgs) {
    if (i.epoch_a >= n || i.epoch_b >= n || i.epoch_a == i.epoch_b)
      throw Error(Errc::Usage, "interferogram " + i.member_a + "/" + i.member_b + " has invalid epoch indices");
    parent[find(i.epoch_a)] = find(i.epoch_b);
  }
  for (std::size_t k = 1; k < n; ++k)
    if (find(k) != find(0)) throw Error(Errc::DisconnectedEpochs, "interferogram network does not connect epoch " + std::to_string(k));

  const std::size_t m = ifgs.size(), u = n - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(u));
  for (std::size_t k = 0; k < m; ++k) {
    if (ifgs[k].epoch_a > 0) A(Eigen::Index(k), Eigen::Index(ifgs[k].epoch_a - 1)) = 1.0;
    if (ifgs[k].epoch_b > 0) A(Eigen::Index(k), Eigen::Index(ifgs[k].epoch_b - 1)) = -1.0;
  }
  const double to_mm = mm_per_radian();
  const auto& grid = ifgs.front().grid;

  std::vector<DeformationSeries> all(points.points.size());
  std::vector<char> ok(points.points.size(), 0);
  parallel_for(points.points.size(), opt.jobs, [&](std::size_t p) {
    const auto& cell = points.points[p];
    Eigen::VectorXd y(static_cast<Eigen::Index>(m)), w(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const double g = std::clamp(double(ifgs[k].coherence(cell.row, cell.col)), 1e-3, opt.max_coherence);
      y[Eigen::Index(k)] = ifgs[k].phase(cell.row, cell.col);
      w[Eigen::Index(k)] = 1.0 / phase_variance(g, ifgs[k].looks);
    }
    const Eigen::MatrixXd N = A.transpose() * w.asDiagonal() * A;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(N);
    const Eigen::VectorXd phi = ldlt.solve(A.transpose() * w.asDiagonal() * y);
    if ((A * phi - y).cwiseAbs().maxCoeff() > opt.wrap_guard) return;
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(Eigen::Index(u), Eigen::Index(u)));
    auto& s = all[p];
    s.point = cell;
    s.east = grid.east(double(cell.col));
    s.north = grid.north(double(cell.row));
    s.epochs = epochs;
    s.los_mm.assign(n, 0.0);
    s.sigma_mm.assign(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      s.los_mm[k] = phi[Eigen::Index(k - 1)] * to_mm;
      s.sigma_mm[k] = std::sqrt(cov(Eigen::Index(k - 1), Eigen::Index(k - 1))) * to_mm;
    }
    ok[p] = 1;
  });
  TimeSeriesResult out;
  for (std::size_t p = 0; p < all.size(); ++p) {
    if (ok[p])
      out.series.push_back(std::move(all[p]));
    else
      out.dropped.push_back(points.points[p]);
  }
  return out;
}

struct CumulativePoint {
  PointCell point;
  double east = 0, north = 0;
  double cumulative_mm = 0;
};

inline std::vector<CumulativePoint> cumulative_deformation(const std::vector<DeformationSeries>& series) {
  std::vector<CumulativePoint> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back({s.point, s.east, s.north, s.los_mm.empty() ? 0.0 : s.los_mm.back()});
  return out;
}

inline void write_points_csv(const std::filesystem::path& path, const std::vector<CumulativePoint>& points) {
  std::string text = "east,north,cumulative_mm\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f,%.4f\n", p.east, p.north, p.cumulative_mm);
    text += buf;
  }
  write_text(path, text);
}

inline void write_series_csv(const std::filesystem::path& path, const DeformationSeries& s) {
  std::string text = "epoch,los_mm,sigma_mm\n";
  char buf[96];
  for (std::size_t k = 0; k < s.epochs.size(); ++k) {
    std::snprintf(buf, sizeof buf, ",%.4f,%.4f\n", s.los_mm[k], s.sigma_mm[k]);
    text += format_utc(s.epochs[k]) + buf;
  }
  write_text(path, text);
}

/// Points coloured by cumulative deformation on the analysis grid.
inline void write_deformation_map(const std::filesystem::path& path, const MapGrid& grid,
                                  const std::vector<CumulativePoint>& points) {
  double scale = 1e-6;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.cumulative_mm));
  Raster<Rgb> img(grid.n_north, grid.n_east, Rgb{0, 0, 0});
  for (const auto& p : points) img(p.point.row, p.point.col) = diverging_color(p.cumulative_mm / scale);
  write_png(path, img);
}

/// Deformation history with 1-sigma error bars.
inline void write_series_plot(const std::filesystem::path& path, const DeformationSeries& s) {
  if (s.epochs.empty()) return;
  double x1 = 1.0, lo = -1.0, hi = 1.0;
  for (std::size_t k = 0; k < s.epochs.size(); ++k) {
    x1 = std::max(x1, days_between(s.epochs.front(), s.epochs[k]));
    lo = std::min(lo, s.los_mm[k] - s.sigma_mm[k]);
    hi = std::max(hi, s.los_mm[k] + s.sigma_mm[k]);
  }
  const double pad = 0.1 * (hi - lo);
  PlotCanvas canvas(480, 320, -0.05 * x1, 1.05 * x1, lo - pad, hi + pad);
  for (std::size_t k = 0; k < s.epochs.size(); ++k) {
    const double d = days_between(s.epochs.front(), s.epochs[k]);
    canvas.error_bar(d, s.los_mm[k], s.sigma_mm[k], Rgb{90, 90, 90});
    canvas.marker(d, s.los_mm[k], Rgb{200, 40, 40}, 3);
  }
  write_png(path, canvas.image());
}

}  // namespace wvstack
