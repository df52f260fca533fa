#include "atorsion/heat_zeta.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <sstream>

#include "atorsion/quadrature.hpp"
#include "atorsion/special.hpp"

namespace atorsion {

double theta(const Spectrum& spectrum, double t) {
  if (!(t > 0)) throw DomainError("theta: t must be positive");
  double s = 0;
  for (Eigen::Index k = spectrum.kernel_dim; k < spectrum.size(); ++k) s += std::exp(-spectrum.eigenvalues(k) * t);
  return s;
}

double truncation_bound(const Spectrum& spectrum, double t) {
  return static_cast<double>(spectrum.size()) * std::exp(-spectrum.lambda_max() * t);
}

double min_valid_time(const Spectrum& spectrum, double tol) {
  if (!(spectrum.lambda_max() > 0)) throw SpectrumError("spectrum has no positive eigenvalue");
  return (std::log(static_cast<double>(spectrum.size())) - std::log(tol)) / spectrum.lambda_max();
}

HeatTraceSamples sample_theta(const Spectrum& spectrum, const Eigen::Ref<const Eigen::VectorXd>& t_grid) {
  HeatTraceSamples s{t_grid, Eigen::VectorXd(t_grid.size()), Eigen::VectorXd(t_grid.size())};
  for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
    s.values(i) = theta(spectrum, t_grid(i));
    s.trunc_bound(i) = truncation_bound(spectrum, t_grid(i));
  }
  return s;
}

Eigen::VectorXd geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0) || !(hi > lo) || count < 2) throw DomainError("geometric_grid: need 0 < lo < hi and count >= 2");
  Eigen::VectorXd g(count);
  const double r = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) g(i) = lo * std::exp(r * i);
  g(count - 1) = hi;
  return g;
}

Eigen::VectorXd uniform_grid(double lo, double hi, int count) {
  if (!(hi > lo) || count < 2) throw DomainError("uniform_grid: need lo < hi and count >= 2");
  return Eigen::VectorXd::LinSpaced(count, lo, hi);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

FitWindow fit_window(const Spectrum& spectrum, const FitOptions& o) {
  const double t_min = min_valid_time(spectrum, o.trunc_tol);
  FitWindow w;
  w.nodes = o.nodes;
  w.t_lo = o.t_lo.value_or(t_min);
  if (w.t_lo < t_min * (1 - 1e-12))
    throw FitWindowError("fit window t_lo = " + fmt(w.t_lo) + " violates the truncation bound n exp(-lambda_max t) < " +
                         fmt(o.trunc_tol) + ", which needs t_lo >= " + fmt(t_min));
  w.t_hi = o.t_hi.value_or(o.window_ratio * w.t_lo);
  if (!(w.t_hi > w.t_lo)) throw FitWindowError("fit window needs t_hi > t_lo");
  if (o.nodes < o.terms + 1) throw FitWindowError("fit window needs more nodes than model terms");
  return w;
}

double AsymptoticFit::model(double t) const {
  double v = coefficients(0) / t, p = 1;
  for (Eigen::Index j = 1; j < coefficients.size(); ++j) {
    v += coefficients(j) * p;
    p *= t;
  }
  return v;
}

AsymptoticFit fit_asymptotics(const HeatTraceSamples& samples, int terms, double trunc_tol) {
  const Eigen::Index m = samples.t.size();
  if (terms < 2 || m < terms) throw FitWindowError("fit needs at least as many samples as terms");
  for (Eigen::Index i = 0; i < m; ++i)
    if (samples.trunc_bound(i) > trunc_tol * (1 + 1e-9))
      throw FitWindowError("sample t = " + fmt(samples.t(i)) + " has truncation bound " + fmt(samples.trunc_bound(i)) +
                           " above " + fmt(trunc_tol));
  // rows scaled by t: t theta = b_{-1} + b_0 t + b_1 t^2 + ...
  Eigen::MatrixXd A(m, terms);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t = samples.t(i);
    double p = 1;
    for (int j = 0; j < terms; ++j) {
      A(i, j) = p;
      p *= t;
    }
    rhs(i) = t * samples.values(i);
  }
  AsymptoticFit fit;
  fit.coefficients = A.colPivHouseholderQr().solve(rhs);
  fit.t_lo = samples.t.minCoeff();
  fit.t_hi = samples.t.maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i)
    fit.residual = std::max(fit.residual, std::abs(samples.values(i) - fit.model(samples.t(i))));
  return fit;
}

AsymptoticFit fit_asymptotics(const Spectrum& spectrum, const FitOptions& options) {
  const FitWindow w = fit_window(spectrum, options);
  return fit_asymptotics(sample_theta(spectrum, geometric_grid(w.t_lo, w.t_hi, w.nodes)), options.terms,
                         options.trunc_tol);
}

double zeta(const Spectrum& spectrum, double s) {
  if (!(s > 1)) throw DomainError("zeta: s must be > 1");
  double z = 0;
  for (Eigen::Index k = spectrum.kernel_dim; k < spectrum.size(); ++k) z += std::pow(spectrum.eigenvalues(k), -s);
  return z;
}

ZetaTail zeta_with_tail(const Spectrum& spectrum, const AsymptoticFit& fit, double s) {
  ZetaTail r;
  r.direct = zeta(spectrum, s);
  const double count = static_cast<double>(spectrum.size() - spectrum.kernel_dim);
  r.lambda_cut = (count - fit.b_0()) / fit.b_minus1();
  const double b = fit.b_minus1();
  r.tail = b * std::pow(r.lambda_cut, 1 - s) / (s - 1);
  r.uncertainty = std::abs(b * (std::pow(r.lambda_cut, 1 - s) - std::pow(spectrum.lambda_max(), 1 - s)) / (s - 1));
  return r;
}

MellinResult zeta_mellin(const Spectrum& spectrum, const AsymptoticFit& fit, double s) {
  if (!(s > 1)) throw DomainError("zeta_mellin: s must be > 1");
  const double lo = fit.t_lo;
  double model = 0;
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    const double e = s + static_cast<double>(j) - 1;
    model += fit.coefficients(j) * std::pow(lo, e) / e;
  }
  const double l1 = spectrum.lambda1();
  const double T = std::max(2 * lo, 60.0 / l1);
  const auto integrand = [&](double y) {
    const double t = std::exp(y);
    return std::pow(t, s) * theta(spectrum, t);
  };
  const IntegrationResult mid = integrate_adaptive(integrand, std::log(lo), std::log(T), 1e-15, 1e-13);
  const double remainder = theta(spectrum, T) * std::pow(T, s - 1) / std::max(l1 - (s - 1) / T, 0.5 * l1);
  const double g = std::tgamma(s);
  MellinResult r;
  r.value = (model + mid.value) / g;
  r.error = (fit.residual * std::pow(lo, s) / s + mid.error + remainder) / g;
  return r;
}

namespace {

// int_0^a of the fitted rho/t = sum_{k>=1} b_k a^k / k
double model_rho_integral(const AsymptoticFit& fit, double a) {
  double v = 0, p = a;
  for (Eigen::Index j = 2; j < fit.coefficients.size(); ++j) {
    const double k = static_cast<double>(j - 1);
    v += fit.coefficients(j) * p / k;
    p *= a;
  }
  return v;
}

double rho_integral(const Spectrum& spectrum, const AsymptoticFit& fit, double T) {
  const double lo = fit.t_lo;
  if (T <= lo) return model_rho_integral(fit, T);
  const double bm = fit.b_minus1(), b0 = fit.b_0();
  const auto f = [&](double t) { return (theta(spectrum, t) - bm / t - b0) / t; };
  return model_rho_integral(fit, lo) + integrate_adaptive(f, lo, T, 1e-14, 1e-13).value;
}

double e1_sum(const Spectrum& spectrum, double T) {
  double s = 0;
  for (Eigen::Index k = spectrum.kernel_dim; k < spectrum.size(); ++k) s += expint_e1(spectrum.eigenvalues(k) * T);
  return s;
}

}  // namespace

double zeta_prime_zero(const Spectrum& spectrum, const AsymptoticFit& fit, double T) {
  if (!(spectrum.lambda1() > 0)) throw SpectrumError("zeta_prime_zero: first nonzero eigenvalue must be positive");
  if (!(T > 0)) throw DomainError("zeta_prime_zero: split point must be positive");
  return e1_sum(spectrum, T) + rho_integral(spectrum, fit, T) - fit.b_minus1() / T +
         fit.b_0() * (std::numbers::egamma + std::log(T));
}

ZetaPrimeParts zeta_prime_parts(const Spectrum& spectrum, const AsymptoticFit& fit) {
  if (!(spectrum.lambda1() > 0)) throw SpectrumError("zeta_prime_zero: first nonzero eigenvalue must be positive");
  ZetaPrimeParts p;
  p.e1_sum = e1_sum(spectrum, 1.0);
  p.rho_integral = rho_integral(spectrum, fit, 1.0);
  const double base = p.e1_sum + p.rho_integral;
  const double bm = fit.b_minus1(), b0 = fit.b_0(), g = std::numbers::egamma;
  p.value = base - bm + g * b0;
  p.statement_variant = base + g * bm - b0;
  p.proof_variant = base + bm + b0;
  return p;
}

TorsionResult analyze_torsion(const Spectrum& spectrum, const FitOptions& options) {
  TorsionResult r;
  const FitWindow w = fit_window(spectrum, options);
  FitOptions o = options;
  o.t_lo = w.t_lo;
  o.t_hi = w.t_hi;
  r.fit = fit_asymptotics(spectrum, o);
  r.parts = zeta_prime_parts(spectrum, r.fit);
  r.zeta_prime0 = r.parts.value;
  r.zeta0 = r.fit.b_0();
  r.b0_full = r.fit.b_0() + spectrum.kernel_dim;

  FitOptions wide = o;
  wide.t_lo = 2 * w.t_lo;
  wide.t_hi = 2 * w.t_hi;
  FitOptions richer = o;
  richer.terms = o.terms + 1;
  const double zp_wide = zeta_prime_zero(spectrum, fit_asymptotics(spectrum, wide));
  const double zp_richer = zeta_prime_zero(spectrum, fit_asymptotics(spectrum, richer));

  r.budget.fit_residual = r.fit.residual * (1 + std::log(w.t_hi / w.t_lo));
  r.budget.truncation =
      static_cast<double>(spectrum.size() - spectrum.kernel_dim) * expint_e1(spectrum.lambda_max() * w.t_lo);
  r.budget.window = std::abs(r.zeta_prime0 - zp_wide);
  r.budget.model_order = std::abs(r.zeta_prime0 - zp_richer);
  return r;
}

Eigen::MatrixXd heat_operator(const OperatorPair& pair, const Spectrum& spectrum, double t) {
  if (!(t > 0)) throw DomainError("heat_operator: t must be positive");
  return spectral_function(pair, spectrum, [t](double l) { return std::exp(-l * t); });
}

DuhamelResult duhamel_residual(const OperatorPair& minus, const OperatorPair& mid, const OperatorPair& plus, double h,
                               double t, int nodes) {
  if (!(h > 0) || !(t > 0) || nodes < 1) throw DomainError("duhamel_residual: need h > 0, t > 0, nodes >= 1");
  const Spectrum sm = generalized_eigs(minus), s0 = generalized_eigs(mid), sp = generalized_eigs(plus);
  const Eigen::MatrixXd dE = (heat_operator(plus, sp, t) - heat_operator(minus, sm, t)) / (2 * h);

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(mid.K.rows(), mid.K.cols());
  const Eigen::MatrixXd dDelta = (apply_laplacian(plus, I) - apply_laplacian(minus, I)) / (2 * h);
  const Eigen::MatrixXd& V = s0.eigenvectors;
  const Eigen::MatrixXd VtM = V.transpose() * mid.M;
  const Eigen::MatrixXd G = VtM * dDelta * V;

  const Eigen::Index n = s0.size();
  Eigen::VectorXd lam = s0.eigenvalues;
  lam.head(s0.kernel_dim).setZero();
  const auto [x, w] = gauss_legendre<double>(nodes);
  Eigen::MatrixXd A(n, nodes), B(n, nodes);
  for (int q = 0; q < nodes; ++q) {
    const double s = 0.5 * t * (x(q) + 1);
    const double wq = 0.5 * t * w(q);
    A.col(q) = (-(t - s) * lam).array().exp() * wq;
    B.col(q) = (-s * lam).array().exp();
  }
  const Eigen::MatrixXd F = G.cwiseProduct(A * B.transpose());
  const Eigen::MatrixXd integral = V * F * VtM;

  DuhamelResult r;
  r.residual = m_operator_norm(mid.M, dE + integral);
  r.derivative_norm = m_operator_norm(mid.M, dE);
  r.relative = r.derivative_norm > 0 ? r.residual / r.derivative_norm : 0.0;
  return r;
}

}  // namespace atorsion

#include "atorsion/operator_theory.hpp"

namespace atorsion {

double heat_trace_norm(const OperatorPair& pair, const Spectrum& spectrum, double t) {
  const Eigen::MatrixXd PE = spectral_function(
      pair, spectrum, [t](double l) { return l == 0.0 ? 0.0 : std::exp(-l * t); });
  return trace_norm(PE, InnerProduct(pair.M));
}

}  // namespace atorsion
