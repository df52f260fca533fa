#include "atorsion/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <memory>
#include <random>
#include <sstream>
#include <unistd.h>

#include "atorsion/anomaly.hpp"
#include "atorsion/cache.hpp"
#include "atorsion/discretization.hpp"
#include "atorsion/eigensolve.hpp"
#include "atorsion/errors.hpp"
#include "atorsion/harness.hpp"
#include "atorsion/heat_zeta.hpp"
#include "atorsion/io.hpp"
#include "atorsion/metrics.hpp"
#include "atorsion/operator_theory.hpp"
#include "atorsion/special.hpp"

namespace atorsion {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "': " + ec.message());
}

namespace {

/// Basis built on first use, so cached runs skip it.
class Workspace {
 public:
  explicit Workspace(const RunConfig& c)
      : c_(c), cache_(resolve_cache_dir(c.cache_dir, c.output_dir)), rule_(c.resolved_n_theta(), c.resolved_n_phi()) {}

  const SpectralBasis& basis() {
    if (!basis_) basis_ = std::make_unique<SpectralBasis>(c_.L, c_.resolved_n_theta(), c_.resolved_n_phi());
    return *basis_;
  }

  const QuadratureRule& rule() const { return rule_; }

  Spectrum spectrum(const ConformalMetric& metric, bool* hit = nullptr) {
    const std::string key = SpectrumCache::key(metric.id(), c_.L, c_.resolved_n_theta(), c_.resolved_n_phi());
    if (auto s = cache_.load(key)) {
      if (hit) *hit = true;
      return *s;
    }
    if (hit) *hit = false;
    Spectrum s = generalized_eigs(assemble(basis(), metric), EigOptions{.vectors = false});
    s.basis_L = c_.L;
    cache_.store(key, s);
    return s;
  }

  FitOptions fit() const {
    FitOptions f;
    f.t_lo = c_.fit_t_lo;
    f.t_hi = c_.fit_t_hi;
    f.terms = c_.fit_terms;
    f.nodes = c_.fit_nodes;
    return f;
  }

 private:
  const RunConfig& c_;
  SpectrumCache cache_;
  QuadratureRule rule_;
  std::unique_ptr<SpectralBasis> basis_;
};

json header(const RunConfig& c, const std::string& metric_id) {
  json j;
  j["metric"] = metric_id;
  j["L"] = c.L;
  j["n_theta"] = c.resolved_n_theta();
  j["n_phi"] = c.resolved_n_phi();
  return j;
}

void write_json(const RunConfig& c, const std::string& name, const json& j) {
  write_file_atomic(fs::path(c.output_dir) / name, j.dump(2) + "\n");
}

void write_csv(const RunConfig& c, const std::string& name, const std::string& body) {
  write_file_atomic(fs::path(c.output_dir) / name, body);
}

json torsion_json(const TorsionResult& t) {
  json j;
  j["zeta_prime0"] = t.zeta_prime0;
  j["zeta0"] = t.zeta0;
  j["b0_with_kernel"] = t.b0_full;
  j["fit"] = {{"t_lo", t.fit.t_lo},
              {"t_hi", t.fit.t_hi},
              {"coefficients", std::vector<double>(t.fit.coefficients.begin(), t.fit.coefficients.end())},
              {"residual", t.fit.residual}};
  j["variants"] = {{"statement", t.parts.statement_variant}, {"proof", t.parts.proof_variant}};
  j["budget"] = {{"fit_residual", t.budget.fit_residual},
                 {"truncation", t.budget.truncation},
                 {"window", t.budget.window},
                 {"model_order", t.budget.model_order},
                 {"total", t.budget.total()}};
  return j;
}

json quillen_json(const QuillenData& q) {
  return {{"metric", q.metric_id},         {"vol", q.vol},
          {"log_l2", q.log_l2},            {"zeta_prime0", q.zeta_prime0},
          {"sign", q.sign_convention},     {"log_quillen", q.log_quillen},
          {"zeta_prime0_budget", q.budget}};
}

int cmd_spectrum(const RunConfig& c, std::ostream&) {
  Workspace ws(c);
  const ConformalMetric m = parse_metric(c.metric);
  const Spectrum s = ws.spectrum(m);
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) out += std::to_string(i) + "," + format_double(s.eigenvalues(i)) + "\n";
  write_csv(c, "spectrum.csv", out);
  return kExitOk;
}

int cmd_theta(const RunConfig& c, std::ostream&) {
  Workspace ws(c);
  const Spectrum s = ws.spectrum(parse_metric(c.metric));
  const Eigen::VectorXd grid = c.t_grid.geometric ? geometric_grid(c.t_grid.lo, c.t_grid.hi, c.t_grid.count)
                                                  : uniform_grid(c.t_grid.lo, c.t_grid.hi, c.t_grid.count);
  const HeatTraceSamples h = sample_theta(s, grid);
  std::string out = "t,theta,trunc_bound\n";
  for (Eigen::Index i = 0; i < h.t.size(); ++i)
    out += format_double(h.t(i)) + "," + format_double(h.values(i)) + "," + format_double(h.trunc_bound(i)) + "\n";
  write_csv(c, "theta.csv", out);
  return kExitOk;
}

int cmd_zeta(const RunConfig& c, std::ostream&) {
  Workspace ws(c);
  const ConformalMetric m = parse_metric(c.metric);
  const Spectrum s = ws.spectrum(m);
  const AsymptoticFit fit = fit_asymptotics(s, ws.fit());
  json j = header(c, m.id());
  json rows = json::array();
  for (double sv : c.s_list) {
    const ZetaTail tail = zeta_with_tail(s, fit, sv);
    const MellinResult mel = zeta_mellin(s, fit, sv);
    rows.push_back({{"s", sv},
                    {"direct", tail.direct},
                    {"tail", tail.tail},
                    {"tail_uncertainty", tail.uncertainty},
                    {"mellin", mel.value},
                    {"mellin_error", mel.error}});
  }
  j["zeta"] = rows;
  write_json(c, "zeta.json", j);
  return kExitOk;
}

int cmd_torsion(const RunConfig& c, std::ostream& log) {
  Workspace ws(c);
  const ConformalMetric m = parse_metric(c.metric);
  bool hit = false;
  const Spectrum s = ws.spectrum(m, &hit);
  const TorsionResult t = analyze_torsion(s, ws.fit());
  const QuillenData q = quillen_log(m, ws.rule(), t);
  json z = header(c, m.id());
  z["kernel_dim"] = s.kernel_dim;
  z["lambda1"] = s.lambda1();
  z["lambda_max"] = s.lambda_max();
  z.update(torsion_json(t));
  write_json(c, "zeta.json", z);
  json qj = header(c, m.id());
  qj.update(quillen_json(q));
  write_json(c, "quillen.json", qj);
  log << "zeta'(0) = " << format_double(t.zeta_prime0) << " +- " << format_double(t.budget.total())
      << (hit ? " (cached spectrum)" : "") << "\n";
  return kExitOk;
}

int cmd_anomaly(const RunConfig& c, std::ostream& log) {
  Workspace ws(c);
  const ConformalMetric mp = parse_metric(c.metric);
  const ConformalMetric mq = parse_metric(c.reference);
  auto analyze = [&](const ConformalMetric& m) {
    MetricAnalysis a;
    a.spectrum = ws.spectrum(m);
    a.torsion = analyze_torsion(a.spectrum, ws.fit());
    a.quillen = quillen_log(m, ws.rule(), a.torsion);
    return a;
  };
  const MetricAnalysis ap = analyze(mp), aq = analyze(mq);
  const TwoRouteComparison r = compare_routes(ap, aq, mp, mq, ws.rule());
  const double allowance = std::max(1e-3, 3 * r.budget);
  const bool pass = r.discrepancy() <= allowance;
  json j;
  j["metric"] = mp.id();
  j["reference"] = mq.id();
  j["L"] = c.L;
  j["n_theta"] = c.resolved_n_theta();
  j["n_phi"] = c.resolved_n_phi();
  j["sign"] = kQuillenSign;
  j["quillen"] = {quillen_json(ap.quillen), quillen_json(aq.quillen)};
  j["direct"] = r.direct;
  j["anomaly"] = r.anomaly;
  j["discrepancy"] = r.discrepancy();
  j["budget"] = r.budget;
  j["allowance"] = allowance;
  j["pass"] = pass;
  write_json(c, "anomaly.json", j);
  if (!pass) log << "two-route discrepancy " << r.discrepancy() << " exceeds " << allowance << "\n";
  return pass ? kExitOk : kExitTolerance;
}

std::string sweep_csv(const std::vector<double>& t_set, const std::vector<SweepRow>& rows) {
  std::string out = "param,metric,vol,lambda1,kernel_dim";
  for (double t : t_set) out += ",theta_" + format_double(t);
  out += ",b_minus1,b_0,zeta_prime0,zeta_budget,log_quillen,sup_log_dist_to_limit,sup_log_dist_to_prev,equivalence_c,"
         "error\n";
  for (const auto& r : rows) {
    out += format_double(r.param) + "," + r.metric_id + "," + format_double(r.vol) + "," + format_double(r.lambda1) +
           "," + std::to_string(r.kernel_dim);
    for (std::size_t i = 0; i < t_set.size(); ++i)
      out += "," + (i < r.theta.size() ? format_double(r.theta[i]) : std::string("nan"));
    for (double v : {r.b_minus1, r.b_0, r.zeta_prime0, r.zeta_budget, r.log_quillen, r.sup_log_dist_to_limit,
                     r.sup_log_dist_to_prev, r.equivalence_c})
      out += "," + format_double(v);
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out += "," + err + "\n";
  }
  return out;
}

int cmd_converge(const RunConfig& c, std::ostream& log) {
  HarnessOptions o;
  o.family = c.family;
  o.params = c.params;
  o.L = c.L;
  o.n_theta = c.n_theta;
  o.n_phi = c.n_phi;
  o.sweep.t_set = {0.5, 1.0, 2.0};
  o.sweep.threads = c.threads;
  o.sweep.fit.t_lo = c.fit_t_lo;
  o.sweep.fit.t_hi = c.fit_t_hi;
  o.sweep.fit.terms = c.fit_terms;
  o.sweep.fit.nodes = c.fit_nodes;
  o.resolvent_L = c.resolvent_L;
  const ConvergenceReport rep = run_convergence(o);

  std::vector<SweepRow> rows = rep.rows;
  rows.push_back(rep.limit_row);
  write_csv(c, "converge.csv", sweep_csv(o.sweep.t_set, rows));

  std::string q = "param,vol,zeta_prime0,log_quillen,budget,diff_to_prev,bound,within\n";
  for (const auto& r : rep.quillen.rows)
    q += format_double(r.p) + "," + format_double(r.vol) + "," + format_double(r.zeta_prime0) + "," +
         format_double(r.log_quillen) + "," + format_double(r.budget) + "," + format_double(r.diff_to_prev) + "," +
         format_double(r.bound) + "," + (r.within ? "1" : "0") + "\n";
  write_csv(c, "converge_quillen.csv", q);

  std::string rs = "param,resolvent_diff_prev,heat_diff_prev,resolvent_diff_limit,heat_diff_limit,sup_log_dist_prev\n";
  for (const auto& r : rep.resolvent.rows)
    rs += format_double(r.param) + "," + format_double(r.resolvent_diff_prev) + "," + format_double(r.heat_diff_prev) +
          "," + format_double(r.resolvent_diff_limit) + "," + format_double(r.heat_diff_limit) + "," +
          format_double(r.sup_log_dist_prev) + "\n";
  write_csv(c, "converge_resolvent.csv", rs);

  json j;
  j["family"] = c.family;
  j["params"] = c.params;
  j["L"] = c.L;
  json tags = json::object();
  json failed = json::array();
  for (const auto& t : rep.tags) {
    tags[t.tag] = {{"pass", t.pass}, {"detail", t.detail}};
    if (!t.pass) failed.push_back(t.tag);
  }
  j["tags"] = tags;
  j["failed"] = failed;
  j["quillen_limit"] = {{"value", rep.quillen.limit}, {"error", rep.quillen.limit_error}};
  j["lambda1_floor"] = {{"kappa", rep.floor.kappa}, {"reference", rep.floor.reference}, {"margin", rep.floor.margin}};
  j["theta1_extrapolated"] = rep.theta_extrapolated;
  j["pass"] = rep.all_pass();
  write_json(c, "summary.json", j);
  for (const auto& t : rep.tags) log << (t.pass ? "PASS " : "FAIL ") << t.tag << ": " << t.detail << "\n";
  return rep.all_pass() ? kExitOk : kExitTolerance;
}

// Small-scale property suites; each returns an empty string on success.
using Check = std::pair<std::string, std::function<std::string()>>;

std::string fail_if(bool bad, const std::string& what) { return bad ? what : std::string(); }

std::vector<Check> selftest_checks() {
  std::vector<Check> checks;
  checks.emplace_back("quadrature", [] {
    const auto [x, w] = gauss_legendre<double>(12);
    double err = 0;
    for (int k = 0; k <= 23; ++k) {
      double s = 0;
      for (int i = 0; i < 12; ++i) s += w(i) * std::pow(x(i), k);
      err = std::max(err, std::abs(s - (k % 2 ? 0.0 : 2.0 / (k + 1))));
    }
    return fail_if(err > 1e-14, "Gauss-Legendre exactness error " + format_double(err));
  });
  checks.emplace_back("expint", [] {
    const double e = std::abs(expint_e1(1.0) - 0.21938393439552029);
    return fail_if(e > 1e-15, "E1(1) error " + format_double(e));
  });
  checks.emplace_back("fs_spectrum", [] {
    const SpectralBasis b(8, 18, 18);
    const Spectrum s = generalized_eigs(assemble(b, fs_metric()), EigOptions{.vectors = false});
    if (s.kernel_dim != 1) return std::string("kernel dimension ") + std::to_string(s.kernel_dim);
    for (int l = 0, i = 0; l <= 8; ++l)
      for (int m = 0; m <= 2 * l; ++m, ++i)
        if (std::abs(s.eigenvalues(i) - l * (l + 1) / 2.0) > 1e-9 * (1 + l * l))
          return "eigenvalue " + std::to_string(i) + " = " + format_double(s.eigenvalues(i));
    return std::string();
  });
  checks.emplace_back("scaling", [] {
    const SpectralBasis b(8, 18, 18);
    const ConformalMetric m = pnorm_metric(3);
    const Spectrum s1 = generalized_eigs(assemble(b, m), EigOptions{.vectors = false});
    const Spectrum s2 = generalized_eigs(assemble(b, scaled_metric(2.0, m)), EigOptions{.vectors = false});
    const double e = ((s2.eigenvalues * 2.0 - s1.eigenvalues).tail(s1.size() - 1).array() /
                      s1.eigenvalues.tail(s1.size() - 1).array())
                         .abs()
                         .maxCoeff();
    return fail_if(e > 1e-10, "scaled eigenvalue mismatch " + format_double(e));
  });
  checks.emplace_back("finite_zeta", [] {
    Spectrum s;
    s.eigenvalues = Eigen::Vector3d(1, 2, 3);
    const double e = std::abs(zeta(s, 2.0) - (1 + 0.25 + 1.0 / 9));
    return fail_if(e > 1e-15, "zeta(2) error " + format_double(e));
  });
  checks.emplace_back("operator_theory", [] {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int k = 0; k < 10; ++k) {
      Eigen::MatrixXd A(12, 12);
      for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
      const InnerProduct ip(Eigen::MatrixXd::Identity(12, 12));
      const double tn = trace_norm(A, ip);
      if (lidskii_residual(A, ip) > 1e-10 * tn) return std::string("Lidskii residual too large");
      if (std::abs(A.trace()) > tn * (1 + 1e-12)) return std::string("|Tr A| exceeds trace norm");
    }
    return std::string();
  });
  checks.emplace_back("duhamel", [] {
    const SpectralBasis b(6, 14, 14);
    const MetricFamily fam = pnorm_family(4);
    const double h = 1e-3;
    const DuhamelResult d = duhamel_residual(assemble(b, interpolate(fam, 2.5 - h)), assemble(b, interpolate(fam, 2.5)),
                                             assemble(b, interpolate(fam, 2.5 + h)), h, 0.5, 32);
    return fail_if(d.relative > 1e-4, "Duhamel relative residual " + format_double(d.relative));
  });
  checks.emplace_back("cache_roundtrip", [] {
    const fs::path dir = fs::temp_directory_path() / ("atorsion-selftest-" + std::to_string(::getpid()));
    Spectrum s;
    s.eigenvalues = Eigen::Vector3d(0, 1.5, 2.25);
    s.kernel_dim = 1;
    s.metric_id = "fs";
    s.basis_L = 1;
    std::string err;
    {
      const SpectrumCache cache(dir);
      const std::string key = SpectrumCache::key("fs", 1, 4, 4);
      cache.store(key, s);
      const auto back = cache.load(key);
      if (!back || back->eigenvalues != s.eigenvalues || back->kernel_dim != 1 || back->metric_id != "fs")
        err = "cache round trip mismatch";
      if (SpectrumCache::key("fs", 1, 4, 4) == SpectrumCache::key("fs", 1, 4, 6)) err = "cache key collision";
    }
    fs::remove_all(dir);
    return err;
  });
  return checks;
}

int cmd_selftest(const RunConfig& c, std::ostream& log) {
  json results = json::array();
  bool all = true;
  for (const auto& [name, fn] : selftest_checks()) {
    std::string err;
    try {
      err = fn();
    } catch (const std::exception& e) {
      err = e.what();
    }
    all = all && err.empty();
    results.push_back({{"check", name}, {"pass", err.empty()}, {"detail", err}});
    log << (err.empty() ? "PASS " : "FAIL ") << name << (err.empty() ? "" : ": " + err) << "\n";
  }
  write_json(c, "selftest.json", {{"checks", results}, {"pass", all}});
  return all ? kExitOk : kExitTolerance;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& config, std::ostream& log) {
  try {
    validate(config);
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + config.output_dir + "': " + ec.message());
    if (subcommand == "spectrum") return cmd_spectrum(config, log);
    if (subcommand == "theta") return cmd_theta(config, log);
    if (subcommand == "zeta") return cmd_zeta(config, log);
    if (subcommand == "torsion") return cmd_torsion(config, log);
    if (subcommand == "anomaly") return cmd_anomaly(config, log);
    if (subcommand == "converge") return cmd_converge(config, log);
    if (subcommand == "selftest") return cmd_selftest(config, log);
    throw ValidationError("unknown subcommand '" + subcommand + "'");
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    log << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ResolutionError& e) {
    log << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const FitWindowError& e) {
    log << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitTolerance;
  }
}

}  // namespace atorsion
