#include "atorsion/anomaly.hpp"

#include <cmath>

#include "atorsion/errors.hpp"
#include "atorsion/parallel.hpp"
#include "atorsion/special.hpp"

namespace atorsion {

namespace {

void require_c1(const ConformalMetric& m) {
  if (!m.has_analytic_c1() && m.smoothness() != Smoothness::smooth)
    throw UnsupportedMetricError("metric " + m.id() +
                                 " is not smooth and has no c1 density; use it only through an approximating family");
}

template <typename F>
double integrate_nodes(const QuadratureRule& rule, F&& f) {
  Eigen::VectorXd v(rule.size());
  for (Eigen::Index k = 0; k < rule.size(); ++k) v(k) = f(rule_point(rule, k));
  return rule.integrate(v);
}

}  // namespace

double bott_chern_integral(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule) {
  require_c1(p);
  require_c1(q);
  return -integrate_nodes(rule,
                          [&](const ChartPoint& pt) {
                            const double lr = std::log(p.factor(pt) / q.factor(pt));
                            if (lr == 0) return 0.0;
                            return lr * (chern_c1_density(p, pt) + chern_c1_density(q, pt));
                          }) /
         12.0;
}

double bott_chern_constant(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule) {
  require_c1(p);
  require_c1(q);
  return integrate_nodes(rule,
                         [&](const ChartPoint& pt) {
                           return std::abs(chern_c1_density(p, pt)) + std::abs(chern_c1_density(q, pt));
                         }) /
         12.0;
}

AnomalyValue bott_chern_checked(const ConformalMetric& p, const ConformalMetric& q, const QuadratureRule& rule) {
  const double coarse = bott_chern_integral(p, q, rule);
  const double fine = bott_chern_integral(p, q, QuadratureRule(2 * rule.n_theta(), 2 * rule.n_phi()));
  return {fine, std::abs(fine - coarse)};
}

double l2_metric_log(const ConformalMetric& metric, const QuadratureRule& rule) {
  return std::log(volume(metric, rule));
}

QuillenData quillen_log(const ConformalMetric& metric, const QuadratureRule& rule, const TorsionResult& torsion,
                        int sign) {
  if (sign != 1 && sign != -1) throw DomainError("Quillen sign convention must be +1 or -1");
  QuillenData d;
  d.metric_id = metric.id();
  d.vol = volume(metric, rule);
  d.log_l2 = std::log(d.vol);
  d.zeta_prime0 = torsion.zeta_prime0;
  d.sign_convention = sign;
  d.log_quillen = d.log_l2 + sign * d.zeta_prime0;
  d.budget = torsion.budget.total();
  return d;
}

MetricAnalysis analyze_metric(const SpectralBasis& basis, const ConformalMetric& metric, const FitOptions& fit) {
  MetricAnalysis a;
  a.spectrum = generalized_eigs(assemble(basis, metric), EigOptions{.vectors = false});
  a.spectrum.basis_L = basis.L();
  a.torsion = analyze_torsion(a.spectrum, fit);
  a.quillen = quillen_log(metric, basis.rule(), a.torsion);
  return a;
}

TwoRouteComparison compare_routes(const MetricAnalysis& p, const MetricAnalysis& q, const ConformalMetric& mp,
                                  const ConformalMetric& mq, const QuadratureRule& rule) {
  const AnomalyValue an = bott_chern_checked(mp, mq, rule);
  TwoRouteComparison c;
  c.direct = p.quillen.log_quillen - q.quillen.log_quillen;
  c.anomaly = -an.value;
  c.budget = p.quillen.budget + q.quillen.budget + an.error;
  return c;
}

int calibrate_quillen_sign(const MetricAnalysis& p, const MetricAnalysis& q, const ConformalMetric& mp,
                           const ConformalMetric& mq, const QuadratureRule& rule) {
  const double anomaly = -bott_chern_integral(mp, mq, rule);
  const double dl2 = p.quillen.log_l2 - q.quillen.log_l2;
  const double dz = p.quillen.zeta_prime0 - q.quillen.zeta_prime0;
  return std::abs(dl2 + dz - anomaly) <= std::abs(dl2 - dz - anomaly) ? +1 : -1;
}

QuillenLimit quillen_limit(const MetricFamily& family, std::span<const double> params, const SpectralBasis& basis,
                           const FitOptions& fit, int threads) {
  if (params.size() < 2) throw DomainError("quillen_limit needs at least two parameters");
  std::vector<ConformalMetric> metrics;
  for (double p : params) metrics.push_back(interpolate(family, p));
  std::vector<QuillenData> q(params.size());
  parallel_for(params.size(), threads, [&](std::size_t i) { q[i] = analyze_metric(basis, metrics[i], fit).quillen; });
  return quillen_limit_table(family.id(), params, metrics, q, basis.rule());
}

QuillenLimit quillen_limit_table(const std::string& family_id, std::span<const double> params,
                                 std::span<const ConformalMetric> metrics, std::span<const QuillenData> q,
                                 const QuadratureRule& rule) {
  if (params.size() < 2 || metrics.size() != params.size() || q.size() != params.size())
    throw DomainError("quillen_limit_table: need at least two matching rows");
  const auto grid = equal_area_grid();
  QuillenLimit out;
  out.family_id = family_id;
  Eigen::VectorXd ps(static_cast<Eigen::Index>(params.size())), vals(ps.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    QuillenLimitRow r;
    r.p = params[i];
    r.vol = q[i].vol;
    r.zeta_prime0 = q[i].zeta_prime0;
    r.log_quillen = q[i].log_quillen;
    r.budget = q[i].budget;
    if (i > 0) {
      r.diff_to_prev = r.log_quillen - q[i - 1].log_quillen;
      const double K = bott_chern_constant(metrics[i], metrics[i - 1], rule);
      r.bound = K * sup_log_distance(metrics[i], metrics[i - 1], grid) + r.budget + q[i - 1].budget;
      r.within = std::abs(r.diff_to_prev) <= r.bound;
      out.cauchy = out.cauchy && r.within;
    }
    ps(static_cast<Eigen::Index>(i)) = r.p;
    vals(static_cast<Eigen::Index>(i)) = r.log_quillen;
    out.rows.push_back(r);
  }
  const Eigen::Index m = ps.size();
  if (m >= 3) {
    const double a = richardson_extrapolate(ps.tail(3), vals.tail(3), Eigen::Vector2d(2, 3)).limit;
    const double b = richardson_extrapolate(ps.tail(2), vals.tail(2), Eigen::VectorXd::Constant(1, 2)).limit;
    out.limit = a;
    out.limit_error = std::abs(a - b) + out.rows.back().budget;
  } else {
    out.limit = richardson_extrapolate(ps.tail(2), vals.tail(2), Eigen::VectorXd::Constant(1, 2)).limit;
    out.limit_error = std::abs(out.limit - vals(m - 1)) + out.rows.back().budget;
  }
  return out;
}

}  // namespace atorsion
