#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wvstack/core/error.hpp"
#include "wvstack/core/io.hpp"

namespace wvstack {

/// Effective configuration of one CLI run. Read from a JSON document; every
/// key is optional and unknown keys are rejected.
struct RunConfig {
  std::string workspace;
  double posting = 2.5;
  double analysis_posting = 5.0;
  std::size_t window = 1024;
  bool allow_small_window = false;
  double coherence_cutoff = 0.5;
  std::size_t pair_k = 3;
  std::uint64_t seed = 1;
  int jobs = 1;
  int looks = 5;
  double max_baseline_days = 48.0;
  double aoi_margin_m = 250.0;
  double min_peak = 0.05;
  std::size_t series_limit = 25;
  bool keep_stage1 = true;

  /// Throws Usage on violations; returns warnings to print.
  std::vector<std::string> validate() const {
    auto bad = [](const std::string& m) { return Error(Errc::Usage, "config: " + m); };
    if (!(posting > 0) || !(analysis_posting > 0)) throw bad("postings must be positive");
    const double ratio = analysis_posting / posting;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9)
      throw bad("posting must divide analysis_posting");
    if (window < 64) throw bad("window must be at least 64");
    if (!(coherence_cutoff >= 0 && coherence_cutoff <= 1)) throw bad("coherence_cutoff must be in [0, 1]");
    if (pair_k < 1) throw bad("pair_k must be at least 1");
    if (jobs < 1) throw bad("jobs must be at least 1");
    if (looks < 1 || looks % 2 == 0) throw bad("looks must be a positive odd number");
    if (!(max_baseline_days > 0)) throw bad("max_baseline_days must be positive");
    if (!(aoi_margin_m >= 0)) throw bad("aoi_margin_m must be non-negative");
    if (!(min_peak >= 0 && min_peak < 1)) throw bad("min_peak must be in [0, 1)");
    std::vector<std::string> warnings;
    if (window < 1024) {
      if (!allow_small_window)
        throw bad("window " + std::to_string(window) + " is below 1024; set allow_small_window to override");
      warnings.push_back("correlation window " + std::to_string(window) +
                         " is below 1024; bulk shifts of a few metres may be poorly constrained");
    }
    return warnings;
  }

  json to_json() const {
    return {{"workspace", workspace},
            {"posting", posting},
            {"analysis_posting", analysis_posting},
            {"window", window},
            {"allow_small_window", allow_small_window},
            {"coherence_cutoff", coherence_cutoff},
            {"pair_k", pair_k},
            {"seed", seed},
            {"jobs", jobs},
            {"looks", looks},
            {"max_baseline_days", max_baseline_days},
            {"aoi_margin_m", aoi_margin_m},
            {"min_peak", min_peak},
            {"series_limit", series_limit},
            {"keep_stage1", keep_stage1}};
  }

  static RunConfig from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::Usage, "config must be a JSON object");
    RunConfig c;
    const auto defaults = c.to_json();
    for (const auto& [key, value] : j.items())
      if (!defaults.contains(key)) throw Error(Errc::Usage, "config: unknown key '" + key + "'");
    auto field = [&](const char* key, auto fallback) { return get_field_or(j, key, fallback, Errc::Usage); };
    c.workspace = field("workspace", c.workspace);
    c.posting = field("posting", c.posting);
    c.analysis_posting = field("analysis_posting", c.analysis_posting);
    c.window = field("window", c.window);
    c.allow_small_window = field("allow_small_window", c.allow_small_window);
    c.coherence_cutoff = field("coherence_cutoff", c.coherence_cutoff);
    c.pair_k = field("pair_k", c.pair_k);
    c.seed = field("seed", c.seed);
    c.jobs = field("jobs", c.jobs);
    c.looks = field("looks", c.looks);
    c.max_baseline_days = field("max_baseline_days", c.max_baseline_days);
    c.aoi_margin_m = field("aoi_margin_m", c.aoi_margin_m);
    c.min_peak = field("min_peak", c.min_peak);
    c.series_limit = field("series_limit", c.series_limit);
    c.keep_stage1 = field("keep_stage1", c.keep_stage1);
    return c;
  }
};

/// Workspace precedence: command line, config file, WVSTACK_WORKSPACE.
inline std::string resolve_workspace(const std::optional<std::string>& flag, const RunConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (!cfg.workspace.empty()) return cfg.workspace;
  if (const char* env = std::getenv("WVSTACK_WORKSPACE"); env && *env) return env;
  throw Error(Errc::Usage, "no workspace: pass --workspace, set it in the config, or set WVSTACK_WORKSPACE");
}

}  // namespace wvstack
