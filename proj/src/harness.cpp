#include "atorsion/harness.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <sstream>

#include "atorsion/eigensolve.hpp"
#include "atorsion/errors.hpp"
#include "atorsion/parallel.hpp"
#include "atorsion/special.hpp"

namespace atorsion {

SweepRow sweep_metric(const ConformalMetric& metric, double param, const SpectralBasis& basis,
                      const SweepOptions& options, const ConformalMetric* limit, const Eigen::MatrixXd* reference_mass) {
  SweepRow row;
  row.param = param;
  row.metric_id = metric.id();
  try {
    const OperatorPair pair = assemble(basis, metric);
    Spectrum spectrum = generalized_eigs(pair, EigOptions{.vectors = false});
    spectrum.basis_L = basis.L();
    const TorsionResult torsion = analyze_torsion(spectrum, options.fit);
    const QuillenData q = quillen_log(metric, basis.rule(), torsion);
    row.vol = q.vol;
    row.lambda1 = spectrum.lambda1();
    row.kernel_dim = spectrum.kernel_dim;
    for (double t : options.t_set) row.theta.push_back(theta(spectrum, t));
    row.b_minus1 = torsion.fit.b_minus1();
    row.b_0 = torsion.fit.b_0();
    row.zeta_prime0 = torsion.zeta_prime0;
    row.zeta_budget = torsion.budget.total();
    row.log_quillen = q.log_quillen;
    if (limit) row.sup_log_dist_to_limit = sup_log_distance(metric, *limit, equal_area_grid());
    if (reference_mass)
      row.equivalence_c = generalized_eigs(pair.M, *reference_mass, EigOptions{.vectors = false}).lambda_max();
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<SweepRow> sweep(const MetricFamily& family, std::span<const double> params, const SpectralBasis& basis,
                            const SweepOptions& options) {
  for (std::size_t i = 1; i < params.size(); ++i)
    if (!(params[i] > params[i - 1])) throw DomainError("sweep parameters must be ascending");
  std::vector<SweepRow> rows(params.size());
  std::vector<std::optional<ConformalMetric>> metrics(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    try {
      metrics[i] = interpolate(family, params[i]);
    } catch (const Error& e) {
      rows[i].param = params[i];
      rows[i].error = e.what();
    }
  }
  std::optional<Eigen::MatrixXd> ref;
  if (!params.empty() && metrics[0]) {
    try {
      ref = mass(basis, *metrics[0]);
    } catch (const Error&) {
    }
  }
  const ConformalMetric* limit = family.limit() ? &*family.limit() : nullptr;
  parallel_for(params.size(), options.threads, [&](std::size_t i) {
    if (!metrics[i]) return;
    rows[i] = sweep_metric(*metrics[i], params[i], basis, options, limit, ref ? &*ref : nullptr);
  });
  const auto grid = equal_area_grid();
  for (std::size_t i = 1; i < params.size(); ++i)
    if (metrics[i] && metrics[i - 1]) rows[i].sup_log_dist_to_prev = sup_log_distance(*metrics[i], *metrics[i - 1], grid);
  return rows;
}

Lambda1Floor lambda1_floor(std::span<const SweepRow> rows) {
  if (rows.size() < 2) throw DomainError("lambda1_floor needs at least two rows");
  Lambda1Floor f;
  if (!rows[0].ok()) return f;
  f.reference = rows[0].lambda1;
  f.kappa = f.reference;
  f.margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i].ok() || !(rows[i].equivalence_c > 0)) {
      ok = false;
      continue;
    }
    f.kappa = std::min(f.kappa, rows[i].lambda1);
    f.margin = std::min(f.margin, rows[i].lambda1 - f.reference / rows[i].equivalence_c);
  }
  f.pass = ok && f.kappa > 0 && f.margin >= -1e-10 * f.reference;
  return f;
}

Lambda1Floor lambda1_floor(const Eigen::MatrixXd& K, const Eigen::MatrixXd& reference_mass,
                           std::span<const Eigen::MatrixXd> masses) {
  Lambda1Floor f;
  f.reference = generalized_eigs(K, reference_mass, EigOptions{.vectors = false}).lambda1();
  f.kappa = f.reference;
  f.margin = std::numeric_limits<double>::infinity();
  for (const auto& M : masses) {
    const double l1 = generalized_eigs(K, M, EigOptions{.vectors = false}).lambda1();
    const double c = generalized_eigs(M, reference_mass, EigOptions{.vectors = false}).lambda_max();
    f.kappa = std::min(f.kappa, l1);
    f.margin = std::min(f.margin, l1 - f.reference / c);
  }
  f.pass = f.kappa > 0 && f.margin >= -1e-10 * f.reference;
  return f;
}

FrozenBound frozen_bound(std::span<const double> diffs, std::span<const double> dists, double safety) {
  if (diffs.size() != dists.size() || diffs.empty()) throw DomainError("frozen_bound: need matching nonempty inputs");
  FrozenBound b;
  b.constant = dists[0] > 0 ? safety * std::abs(diffs[0]) / dists[0] : 0.0;
  b.pass.push_back(true);
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    const bool ok = std::abs(diffs[i]) <= b.constant * dists[i] * (1 + 1e-12) + 1e-14;
    b.pass.push_back(ok);
    b.all = b.all && ok;
  }
  return b;
}

ResolventTable resolvent_convergence(const MetricFamily& family, std::span<const double> params,
                                     const SpectralBasis& basis, double t, int threads) {
  if (params.size() < 2) throw DomainError("resolvent_convergence needs at least two parameters");
  std::vector<ConformalMetric> metrics;
  for (double p : params) metrics.push_back(interpolate(family, p));
  const ConformalMetric ref_metric = family.limit() ? *family.limit() : family.member(family.size() - 1);
  metrics.push_back(ref_metric);

  const std::size_t m = metrics.size();
  std::vector<Eigen::MatrixXd> R(m), E(m);
  Eigen::MatrixXd Mref;
  parallel_for(m, threads, [&](std::size_t i) {
    const OperatorPair pair = assemble(basis, metrics[i]);
    const Spectrum s = generalized_eigs(pair);
    R[i] = resolvent(pair, s);
    E[i] = heat_operator(pair, s, t);
    if (i + 1 == m) Mref = pair.M;
  });

  const auto grid = equal_area_grid();
  ResolventTable table;
  std::vector<double> rd, hd, dist;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ResolventRow r;
    r.param = params[i];
    r.resolvent_diff_limit = m_operator_norm(Mref, R[i] - R[m - 1]);
    r.heat_diff_limit = m_operator_norm(Mref, E[i] - E[m - 1]);
    if (i > 0) {
      r.resolvent_diff_prev = m_operator_norm(Mref, R[i] - R[i - 1]);
      r.heat_diff_prev = m_operator_norm(Mref, E[i] - E[i - 1]);
      r.sup_log_dist_prev = sup_log_distance(metrics[i], metrics[i - 1], grid);
      rd.push_back(r.resolvent_diff_prev);
      hd.push_back(r.heat_diff_prev);
      dist.push_back(r.sup_log_dist_prev);
      if (i > 1) table.monotone = table.monotone && r.resolvent_diff_prev < table.rows.back().resolvent_diff_prev;
    }
    table.rows.push_back(r);
  }
  table.resolvent_bound = frozen_bound(rd, dist);
  table.heat_bound = frozen_bound(hd, dist);
  return table;
}

Eigen::MatrixXd mass_derivative(const SpectralBasis& basis, const MetricFamily& family, double u) {
  if (!(u >= 1)) throw DomainError("mass_derivative: u must be >= 1");
  const double k = std::ceil(u);
  const auto ki = static_cast<std::size_t>(k);
  if (ki >= family.size()) throw DomainError("mass_derivative: family too short");
  const double dr = bump_derivative(u - (k - 1));
  const QuadratureRule& rule = basis.rule();
  Eigen::VectorXd d(rule.size());
  for (Eigen::Index n = 0; n < rule.size(); ++n) {
    const ChartPoint p = rule_point(rule, n);
    const double q = 1 + p.abs2();
    d(n) = dr * (family.member(ki).factor(p) - family.member(ki - 1).factor(p)) * q * q;
  }
  return weighted_gram(basis, d);
}

double laplacian_variation_ratio(const SpectralBasis& basis, const MetricFamily& family, double u, int samples,
                                 unsigned seed) {
  const OperatorPair pair = assemble(basis, interpolate(family, u));
  const Eigen::MatrixXd dM = mass_derivative(basis, family, u);
  Eigen::LLT<Eigen::MatrixXd> llt(pair.M);
  if (llt.info() != Eigen::Success) throw IndefiniteMassError("mass matrix is not positive definite");

  double delta_hat = delta_x(family, u, equal_area_grid());
  for (Eigen::Index n = 0; n < basis.rule().size(); ++n)
    delta_hat = std::max(delta_hat, std::abs(interpolate_log_rate(family, u, rule_point(basis.rule(), n))));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const auto mnorm = [&](const Eigen::VectorXd& x) { return std::sqrt(x.dot(pair.M * x)); };
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v(basis.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    const Eigen::VectorXd lv = llt.solve(pair.K * v);
    const Eigen::VectorXd dlv = -llt.solve(dM * lv);
    const double denom = delta_hat * mnorm(lv);
    if (denom > 0) worst = std::max(worst, mnorm(dlv) / denom);
  }
  return worst;
}

bool ConvergenceReport::all_pass() const {
  for (const auto& t : tags)
    if (!t.pass) return false;
  return !tags.empty();
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ConvergenceReport run_convergence(const HarnessOptions& o) {
  if (o.params.size() < 3) throw ValidationError("convergence run needs at least three parameters");
  const int nt = o.n_theta > 0 ? o.n_theta : 2 * o.L + 2;
  const int np = o.n_phi > 0 ? o.n_phi : 2 * o.L + 2;
  const SpectralBasis basis = build_basis(o.L, nt, np);
  const MetricFamily family = parse_family(o.family, static_cast<int>(std::ceil(o.params.back())) + 2);

  ConvergenceReport rep;
  rep.rows = sweep(family, o.params, basis, o.sweep);
  const ConformalMetric limit = family.limit() ? *family.limit() : family.member(family.size() - 1);
  const Eigen::MatrixXd ref_mass = mass(basis, interpolate(family, o.params.front()));
  rep.limit_row = sweep_metric(limit, std::numeric_limits<double>::infinity(), basis, o.sweep, &limit, &ref_mass);

  std::vector<ConformalMetric> metrics;
  std::vector<QuillenData> qd;
  bool rows_ok = rep.limit_row.ok();
  for (const auto& r : rep.rows) rows_ok = rows_ok && r.ok();
  std::string row_errors;
  for (const auto& r : rep.rows)
    if (!r.ok()) row_errors += " [" + num(r.param) + ": " + r.error + "]";

  auto tag = [&rep](std::string name, bool pass, std::string detail) {
    rep.tags.push_back({std::move(name), pass, std::move(detail)});
  };

  // laplaceTX: kernel = constants, positive spectrum
  {
    bool ok = rows_ok;
    for (const auto& r : rep.rows) ok = ok && r.kernel_dim == 1 && r.lambda1 > 0;
    ok = ok && rep.limit_row.kernel_dim == 1 && rep.limit_row.lambda1 > 0;
    tag("laplaceTX", ok, ok ? "kernel_dim = 1 and lambda1 > 0 on every row" : "row failure or kernel mismatch" + row_errors);
  }
  if (!rows_ok) {
    for (const char* t : {"bornelapbelt", "deltacompact", "variationEu", "key2", "convergenceAnomaly", "compare2methods",
                          "lowerbound"})
      tag(t, false, "sweep rows failed" + row_errors);
    return rep;
  }

  for (std::size_t i = 0; i < o.params.size(); ++i) {
    metrics.push_back(interpolate(family, o.params[i]));
    const auto& r = rep.rows[i];
    qd.push_back({r.metric_id, r.vol, std::log(r.vol), r.zeta_prime0, r.log_quillen, kQuillenSign, r.zeta_budget});
  }

  const SpectralBasis rbasis = build_basis(o.resolvent_L);
  const double u_mid = o.params.front() + 0.5;
  {
    const double ratio = laplacian_variation_ratio(rbasis, family, u_mid, 100, 7);
    tag("bornelapbelt", ratio <= 1 + 1e-9,
        "max ||dDelta v|| / (delta_hat ||Delta v||) = " + num(ratio) + " at u = " + num(u_mid));
  }

  rep.resolvent = resolvent_convergence(family, o.params, rbasis, 1.0, o.sweep.threads);
  tag("deltacompact", rep.resolvent.resolvent_bound.all && rep.resolvent.monotone,
      "resolvent differences " + std::string(rep.resolvent.monotone ? "decrease" : "do not decrease") +
          ", frozen constant " + num(rep.resolvent.resolvent_bound.constant));

  {
    const DuhamelResult d = duhamel_residual(assemble(rbasis, interpolate(family, u_mid - 1e-3)),
                                             assemble(rbasis, interpolate(family, u_mid)),
                                             assemble(rbasis, interpolate(family, u_mid + 1e-3)), 1e-3, 0.5, 32);
    const bool ok = rep.resolvent.heat_bound.all && d.relative < 1e-4;
    tag("variationEu", ok,
        "heat differences frozen constant " + num(rep.resolvent.heat_bound.constant) + ", Duhamel relative residual " +
            num(d.relative));
  }

  // key2: theta and zeta'(0) converge to the directly assembled limit
  {
    const std::size_t m = o.params.size();
    std::size_t ti = 0;
    for (std::size_t j = 0; j < o.sweep.t_set.size(); ++j)
      if (o.sweep.t_set[j] == 1.0) ti = j;
    std::vector<double> tdiff, dist;
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < m; ++i) {
      tdiff.push_back(rep.rows[i].theta[ti] - rep.rows[i - 1].theta[ti]);
      dist.push_back(rep.rows[i].sup_log_dist_to_prev);
      const double dz = std::abs(rep.rows[i].zeta_prime0 - rep.rows[i - 1].zeta_prime0);
      decreasing = decreasing && dz < prev;
      prev = dz;
    }
    const FrozenBound tb = frozen_bound(tdiff, dist);
    Eigen::VectorXd ps(3), ths(3);
    for (int j = 0; j < 3; ++j) {
      ps(j) = rep.rows[m - 3 + j].param;
      ths(j) = rep.rows[m - 3 + j].theta[ti];
    }
    rep.theta_extrapolated = richardson_extrapolate(ps, ths, Eigen::Vector2d(2, 3)).limit;
    const double zgap = std::abs(rep.rows.back().zeta_prime0 - rep.limit_row.zeta_prime0);
    const double tgap = std::abs(rep.theta_extrapolated - rep.limit_row.theta[ti]);
    const double traw = std::abs(rep.rows.back().theta[ti] - rep.limit_row.theta[ti]);
    const bool ok = decreasing && tb.all && zgap <= o.zeta_limit_tol && traw <= o.theta_limit_tol;
    tag("key2", ok,
        "zeta' differences " + std::string(decreasing ? "decrease" : "do not decrease") + ", theta(1) steps " +
            (tb.all ? "within" : "outside") + " frozen bound, |zeta'_last - zeta'_limit| = " + num(zgap) +
            ", |theta_last(1) - theta_limit(1)| = " + num(traw) + " (tolerance " + num(o.theta_limit_tol) +
            "; extrapolated sequence limit differs by " + num(tgap) + ")");
  }

  rep.quillen = quillen_limit_table(family.id(), o.params, metrics, qd, basis.rule());
  tag("convergenceAnomaly", rep.quillen.cauchy,
      "log h_Q differences within K sup|log(h_p/h_q)| + budgets; limit " + num(rep.quillen.limit) + " +- " +
          num(rep.quillen.limit_error));

  {
    bool ok = true;
    double worst = 0;
    std::string detail;
    try {
      for (std::size_t i = 1; i < o.params.size(); ++i) {
        const AnomalyValue an = bott_chern_checked(metrics[i], metrics[0], basis.rule());
        const double direct = qd[i].log_quillen - qd[0].log_quillen;
        const double budget = qd[i].budget + qd[0].budget + an.error;
        const double gap = std::abs(direct + an.value);
        worst = std::max(worst, gap / std::max(1e-3, 3 * budget));
        ok = ok && gap <= std::max(1e-3, 3 * budget);
      }
      detail = "max discrepancy / allowance = " + num(worst);
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    tag("compare2methods", ok, detail);
  }

  rep.floor = lambda1_floor(rep.rows);
  tag("lowerbound", rep.floor.pass, "kappa = " + num(rep.floor.kappa) + ", margin = " + num(rep.floor.margin));
  return rep;
}

}  // namespace atorsion
