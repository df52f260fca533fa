#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace atorsion {

struct TimeGrid {
  double lo = 0.01;
  double hi = 10.0;
  int count = 64;
  bool geometric = true;
};

/// Everything a CLI run needs. Loaded from an INI file of the form
///
///   [metric]          spec, reference
///   [discretization]  L, n_theta, n_phi
///   [heat]            t_lo, t_hi, t_count, t_geometric, fit_t_lo, fit_t_hi, fit_terms, fit_nodes
///   [zeta]            s
///   [family]          spec, params, resolvent_L
///   [run]             output_dir, cache_dir, threads
///
/// Unknown sections or keys are rejected.
struct RunConfig {
  std::string metric = "fs";
  std::string reference = "fs";
  int L = 16;
  int n_theta = 0;  // 0: 2L+2
  int n_phi = 0;
  TimeGrid t_grid;
  std::optional<double> fit_t_lo;
  std::optional<double> fit_t_hi;
  int fit_terms = 3;
  int fit_nodes = 25;
  std::vector<double> s_list{1.5, 2.0, 3.0};
  std::string family = "pnorm";
  std::vector<double> params{2, 4, 8, 16, 32};
  int resolvent_L = 16;
  std::string output_dir = ".";
  std::string cache_dir;  // empty: ATORSION_CACHE_DIR, then <output_dir>/.atorsion-cache
  int threads = 1;

  int resolved_n_theta() const { return n_theta > 0 ? n_theta : 2 * L + 2; }
  int resolved_n_phi() const { return n_phi > 0 ? n_phi : 2 * L + 2; }
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Applies "section.key=value" on top of an existing config.
void apply_override(RunConfig& config, const std::string& assignment);

/// Range checks; throws ValidationError.
void validate(const RunConfig& config);

}  // namespace atorsion
