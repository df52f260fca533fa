#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "atorsion/anomaly.hpp"
#include "atorsion/discretization.hpp"
#include "atorsion/heat_zeta.hpp"
#include "atorsion/metrics.hpp"

namespace atorsion {

struct SweepOptions {
  std::vector<double> t_set{1.0};
  FitOptions fit;
  int threads = 1;
};

struct SweepRow {
  double param = 0;
  std::string metric_id;
  double vol = std::numeric_limits<double>::quiet_NaN();
  double lambda1 = std::numeric_limits<double>::quiet_NaN();
  int kernel_dim = 0;
  std::vector<double> theta;  // at SweepOptions::t_set
  double b_minus1 = std::numeric_limits<double>::quiet_NaN();
  double b_0 = std::numeric_limits<double>::quiet_NaN();
  double zeta_prime0 = std::numeric_limits<double>::quiet_NaN();
  double zeta_budget = std::numeric_limits<double>::quiet_NaN();
  double log_quillen = std::numeric_limits<double>::quiet_NaN();
  double sup_log_dist_to_limit = std::numeric_limits<double>::quiet_NaN();
  double sup_log_dist_to_prev = 0;
  /// Smallest c with M_param <= c M_ref, the reference being the first row.
  double equivalence_c = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // non-empty when the row failed

  bool ok() const { return error.empty(); }
};

/// Runs the pipeline on interpolate(family, u) for each parameter. Rows are
/// independent; a failing row records its error and the sweep continues.
std::vector<SweepRow> sweep(const MetricFamily& family, std::span<const double> params, const SpectralBasis& basis,
                            const SweepOptions& options = {});

/// One row for an explicit metric, e.g. the limit metric assembled directly.
SweepRow sweep_metric(const ConformalMetric& metric, double param, const SpectralBasis& basis,
                      const SweepOptions& options, const ConformalMetric* limit = nullptr,
                      const Eigen::MatrixXd* reference_mass = nullptr);

struct Lambda1Floor {
  double kappa = 0;       // min lambda1 over rows
  double reference = 0;   // lambda1 of the reference row
  double margin = 0;      // min over rows of lambda1 - reference / c
  bool pass = false;
};

/// Min-max floor lambda1_p >= lambda1_ref / c_p with c_p measured per row.
Lambda1Floor lambda1_floor(std::span<const SweepRow> rows);

/// Same check on raw pencils (K, M_ref) and (K, M_i).
Lambda1Floor lambda1_floor(const Eigen::MatrixXd& K, const Eigen::MatrixXd& reference_mass,
                           std::span<const Eigen::MatrixXd> masses);

/// Frozen-constant check: C = safety * |d_0| / dist_0 from the first pair,
/// then |d_i| <= C dist_i for the rest.
struct FrozenBound {
  double constant = 0;
  std::vector<bool> pass;
  bool all = true;
};
FrozenBound frozen_bound(std::span<const double> diffs, std::span<const double> dists, double safety = 2.0);

struct ResolventRow {
  double param = 0;
  double resolvent_diff_prev = 0;
  double heat_diff_prev = 0;
  double resolvent_diff_limit = 0;
  double heat_diff_limit = 0;
  double sup_log_dist_prev = 0;
};

struct ResolventTable {
  std::vector<ResolventRow> rows;
  FrozenBound resolvent_bound;
  FrozenBound heat_bound;
  bool monotone = true;  // consecutive resolvent differences decrease
};

/// ||(I+Delta_p)^{-1} - (I+Delta_q)^{-1}||_{M_ref} and ||E_p(t) - E_q(t)||
/// along the parameters; M_ref and the limit column use the family's limit
/// metric (or the last member).
ResolventTable resolvent_convergence(const MetricFamily& family, std::span<const double> params,
                                     const SpectralBasis& basis, double t = 1.0, int threads = 1);

/// d/du of the mass matrix of interpolate(family, u), from the closed form.
Eigen::MatrixXd mass_derivative(const SpectralBasis& basis, const MetricFamily& family, double u);

/// max over random v of ||(d_u Delta) v||_M / (delta_hat ||Delta v||_M), with
/// delta_hat the sup of |d_u log H(u)^{-1}| over the quadrature nodes and the
/// equal-area grid. Values <= 1 confirm the bound.
double laplacian_variation_ratio(const SpectralBasis& basis, const MetricFamily& family, double u, int samples,
                                 unsigned seed);

struct HarnessOptions {
  std::string family = "pnorm";
  std::vector<double> params{2, 4, 8, 16, 32};
  int L = 32;
  int n_theta = 0;  // 0: 2L+2
  int n_phi = 0;
  SweepOptions sweep;
  int resolvent_L = 16;
  double zeta_limit_tol = 5e-3;
  double theta_limit_tol = 1e-4;
};

struct TagResult {
  std::string tag;
  bool pass = false;
  std::string detail;
};

struct ConvergenceReport {
  std::vector<SweepRow> rows;
  SweepRow limit_row;
  QuillenLimit quillen;
  Lambda1Floor floor;
  ResolventTable resolvent;
  double theta_extrapolated = 0;  // Richardson limit of theta(1) along the rows, reported only
  std::vector<TagResult> tags;

  bool all_pass() const;
};

ConvergenceReport run_convergence(const HarnessOptions& options);

}  // namespace atorsion
