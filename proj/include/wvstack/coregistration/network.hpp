#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wvstack/coregistration/measure.hpp"
#include "wvstack/core/time.hpp"

namespace wvstack {

struct SceneOffset {
  std::string scene;
  double dt_azimuth = 0;  // ms
  double d_range = 0;     // m
  double d_east = 0;
  double d_north = 0;
  double residual = 0;    // RMS misfit of incident edges, m

  static constexpr double flag_threshold_ms = 10.0;
  bool flagged() const { return std::abs(dt_azimuth) > flag_threshold_ms; }
};

struct OffsetNetwork {
  std::vector<std::string> nodes;
  std::vector<OffsetMeasurement> edges;
  std::string reference;
};

struct NetworkSolution {
  std::vector<SceneOffset> scenes;     // same order as the network nodes
  std::vector<double> edge_residuals;  // |(off_b - off_a) - meas| per edge; NaN for dropped edges
};

/// Pairs (i, j), i < j, linking each scene to its k nearest neighbours in time
/// plus the reference. Scenes are indexed in the order given.
inline std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const std::vector<UtcTime>& times, std::size_t k,
                                                                    std::size_t reference) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t x, std::size_t y) {
      return std::abs(seconds_between(times[i], times[x])) < std::abs(seconds_between(times[i], times[y]));
    });
    for (std::size_t m = 0; m < std::min(k, others.size()); ++m)
      pairs.insert({std::min(i, others[m]), std::max(i, others[m])});
    if (i != reference) pairs.insert({std::min(i, reference), std::max(i, reference)});
  }
  return {pairs.begin(), pairs.end()};
}

/// Weighted least squares for per-scene map offsets with the reference pinned
/// at zero. Edges below `min_peak` are ignored; weights are the edge snr.
inline NetworkSolution invert_network(const OffsetNetwork& net, double min_peak = 0.05) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (!index.emplace(net.nodes[i], i).second) throw Error(Errc::Usage, "duplicate network node " + net.nodes[i]);
  if (!index.count(net.reference)) throw Error(Errc::Usage, "reference " + net.reference + " is not a network node");
  const std::size_t n = net.nodes.size(), ref = index.at(net.reference);

  std::vector<std::size_t> used;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& m = net.edges[e];
    auto ia = index.find(m.scene_a), ib = index.find(m.scene_b);
    if (ia == index.end() || ib == index.end())
      throw Error(Errc::Usage, "edge " + m.scene_a + "-" + m.scene_b + " names an unknown scene");
    if (ia->second == ib->second) throw Error(Errc::Usage, "self edge on " + m.scene_a);
    if (m.peak_correlation < min_peak) continue;
    if (!(m.snr > 0)) throw Error(Errc::Usage, "edge " + m.scene_a + "-" + m.scene_b + " has non-positive snr");
    used.push_back(e);
    parent[find(ia->second)] = find(ib->second);
  }

  std::map<std::size_t, std::vector<std::string>> components;
  for (std::size_t i = 0; i < n; ++i) components[find(i)].push_back(net.nodes[i]);
  if (components.size() > 1) {
    std::string msg = std::to_string(components.size()) + " components:";
    for (const auto& [root, members] : components) {
      msg += " {";
      for (std::size_t i = 0; i < members.size(); ++i) msg += (i ? ", " : "") + members[i];
      msg += "}";
    }
    throw Error(Errc::DisconnectedNetwork, msg);
  }

  // Unknown columns skip the reference.
  auto column = [&](std::size_t node) { return node < ref ? long(node) : long(node) - 1; };
  Eigen::VectorXd offsets_e = Eigen::VectorXd::Zero(long(n)), offsets_n = Eigen::VectorXd::Zero(long(n));
  if (n > 1) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(long(used.size()), long(n - 1));
    Eigen::MatrixXd rhs(long(used.size()), 2);
    for (std::size_t k = 0; k < used.size(); ++k) {
      const auto& m = net.edges[used[k]];
      const double s = std::sqrt(m.snr);
      const std::size_t ia = index.at(m.scene_a), ib = index.at(m.scene_b);
      if (ia != ref) a(long(k), column(ia)) = -s;
      if (ib != ref) a(long(k), column(ib)) = s;
      rhs(long(k), 0) = s * m.d_east;
      rhs(long(k), 1) = s * m.d_north;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < long(n - 1)) throw Error(Errc::SingularSystem, "offset network design matrix is rank deficient");
    const Eigen::MatrixXd x = qr.solve(rhs);
    for (std::size_t i = 0; i < n; ++i)
      if (i != ref) offsets_e(long(i)) = x(column(i), 0), offsets_n(long(i)) = x(column(i), 1);
  }

  NetworkSolution sol;
  sol.edge_residuals.assign(net.edges.size(), std::nan(""));
  std::vector<double> sum_sq(n, 0.0);
  std::vector<std::size_t> degree(n, 0);
  for (auto e : used) {
    const auto& m = net.edges[e];
    const std::size_t ia = index.at(m.scene_a), ib = index.at(m.scene_b);
    const double re = offsets_e(long(ib)) - offsets_e(long(ia)) - m.d_east;
    const double rn = offsets_n(long(ib)) - offsets_n(long(ia)) - m.d_north;
    sol.edge_residuals[e] = std::hypot(re, rn);
    for (auto node : {ia, ib}) sum_sq[node] += re * re + rn * rn, ++degree[node];
  }
  for (std::size_t i = 0; i < n; ++i) {
    SceneOffset s;
    s.scene = net.nodes[i];
    s.d_east = offsets_e(long(i));
    s.d_north = offsets_n(long(i));
    s.residual = degree[i] ? std::sqrt(sum_sq[i] / double(degree[i])) : 0.0;
    sol.scenes.push_back(s);
  }
  return sol;
}

inline void write_edges_csv(const std::filesystem::path& path, const std::vector<OffsetMeasurement>& edges) {
  std::ostringstream out;
  out << "scene_a,scene_b,d_east,d_north,peak,snr,window_east,window_north,windows\n";
  char buf[256];
  for (const auto& m : edges) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.4f,%.3f,%.3f,%zu\n", m.d_east, m.d_north, m.peak_correlation,
                  m.snr, m.window_east, m.window_north, m.windows_used);
    out << m.scene_a << ',' << m.scene_b << ',' << buf;
  }
  write_text(path, out.str());
}

inline void write_scene_offsets_csv(const std::filesystem::path& path, const std::vector<SceneOffset>& scenes) {
  std::ostringstream out;
  out << "scene,dt_azimuth_ms,d_range_m,d_east_m,d_north_m,residual_m,flagged\n";
  char buf[256];
  for (const auto& s : scenes) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", s.dt_azimuth, s.d_range, s.d_east, s.d_north,
                  s.residual, s.flagged() ? 1 : 0);
    out << s.scene << ',' << buf;
  }
  write_text(path, out.str());
}

}  // namespace wvstack
