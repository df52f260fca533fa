#pragma once

#include <span>
#include <string>
#include <vector>

#include "atorsion/discretization.hpp"
#include "atorsion/heat_zeta.hpp"
#include "atorsion/metrics.hpp"

namespace atorsion {

/// -(1/12) int log(h_p/h_q) (c1(h_p) + c1(h_q)). Both c1 densities must be
/// available; a singular metric without analytic c1 raises UnsupportedMetricError.
double bott_chern_integral(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule);

/// K = (1/12) int (|c1(h_p)| + |c1(h_q)|), so |I(p,q)| <= K sup|log(h_p/h_q)|.
double bott_chern_constant(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule);

/// Bott-Chern integral with a quadrature error estimate from a rule of twice
/// the resolution.
struct AnomalyValue {
  double value = 0;
  double error = 0;
};
AnomalyValue bott_chern_checked(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule);

/// log vol: the H^0 factor of the L^2 metric for the unit section (H^1 = 0).
double l2_metric_log(const ConformalMetric& metric, const QuadratureRule& rule);

/// Sign sigma in log h_Q = log h_L2 + sigma zeta'(0), as determined by
/// calibrate_quillen_sign on (fs, pnorm:2) at L = 32.
constexpr int kQuillenSign = +1;

struct QuillenData {
  std::string metric_id;
  double vol = 0;
  double log_l2 = 0;
  double zeta_prime0 = 0;
  double log_quillen = 0;
  int sign_convention = kQuillenSign;
  double budget = 0;  // zeta'(0) error budget
};

QuillenData quillen_log(const ConformalMetric& metric, const QuadratureRule& rule, const TorsionResult& torsion,
                        int sign = kQuillenSign);

/// Everything the pipeline derives from one metric on one basis.
struct MetricAnalysis {
  QuillenData quillen;
  Spectrum spectrum;  // values only
  TorsionResult torsion;
};

MetricAnalysis analyze_metric(const SpectralBasis& basis, const ConformalMetric& metric,
                              const FitOptions& fit = {});

/// Direct spectral difference of log Quillen metrics against the anomaly
/// prediction -I(p, q).
struct TwoRouteComparison {
  double direct = 0;       // log h_Q(p) - log h_Q(q)
  double anomaly = 0;      // -I(p, q)
  double budget = 0;       // both zeta'(0) budgets plus anomaly quadrature error
  double discrepancy() const { return std::abs(direct - anomaly); }
};

TwoRouteComparison compare_routes(const MetricAnalysis& p, const MetricAnalysis& q, const ConformalMetric& mp,
                                  const ConformalMetric& mq, const QuadratureRule& rule);

/// Chooses sigma in {+1, -1} that makes the two routes agree on the pair.
int calibrate_quillen_sign(const MetricAnalysis& p, const MetricAnalysis& q, const ConformalMetric& mp,
                           const ConformalMetric& mq, const QuadratureRule& rule);

struct QuillenLimitRow {
  double p = 0;
  double vol = 0;
  double zeta_prime0 = 0;
  double log_quillen = 0;
  double budget = 0;
  double diff_to_prev = 0;
  double bound = 0;  // K sup|log(h_p/h_prev)| + budgets
  bool within = true;
};

struct QuillenLimit {
  std::string family_id;
  std::vector<QuillenLimitRow> rows;
  double limit = 0;
  double limit_error = 0;
  bool cauchy = true;
};

/// Cauchy table and Richardson limit from per-member results.
QuillenLimit quillen_limit_table(const std::string& family_id, std::span<const double> params,
                                 std::span<const ConformalMetric> metrics, std::span<const QuillenData> data,
                                 const QuadratureRule& rule);

/// log h_Q along the family at the given parameters, its Cauchy table and a
/// Richardson estimate of the limit.
QuillenLimit quillen_limit(const MetricFamily& family, std::span<const double> params, const SpectralBasis& basis,
                           const FitOptions& fit = {}, int threads = 1);

}  // namespace atorsion
