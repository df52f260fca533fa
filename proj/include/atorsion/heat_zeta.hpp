#pragma once

#include <Eigen/Core>
#include <optional>

#include "atorsion/eigensolve.hpp"

namespace atorsion {

struct HeatTraceSamples {
  Eigen::VectorXd t;
  Eigen::VectorXd values;
  Eigen::VectorXd trunc_bound;  // n exp(-lambda_max t)
};

/// theta(t) = sum over nonzero eigenvalues of exp(-lambda t).
double theta(const Spectrum& spectrum, double t);
/// n exp(-lambda_max t): bound on the contribution of unresolved modes.
double truncation_bound(const Spectrum& spectrum, double t);
/// Smallest t with truncation_bound(t) <= tol.
double min_valid_time(const Spectrum& spectrum, double tol = 1e-8);

HeatTraceSamples sample_theta(const Spectrum& spectrum, const Eigen::Ref<const Eigen::VectorXd>& t_grid);
Eigen::VectorXd geometric_grid(double lo, double hi, int count);
Eigen::VectorXd uniform_grid(double lo, double hi, int count);

struct FitOptions {
  std::optional<double> t_lo;  // default: min_valid_time(trunc_tol)
  std::optional<double> t_hi;  // default: window_ratio * t_lo
  double window_ratio = 10;
  int nodes = 25;
  int terms = 3;  // b_{-1}, b_0, b_1, ...
  double trunc_tol = 1e-8;
};

struct FitWindow {
  double t_lo = 0;
  double t_hi = 0;
  int nodes = 25;
};

/// Window implied by the options; throws FitWindowError when an explicit
/// window leaves the region where the truncation bound holds.
FitWindow fit_window(const Spectrum& spectrum, const FitOptions& options = {});

struct AsymptoticFit {
  Eigen::VectorXd coefficients;  // b_{-1}, b_0, b_1, ...
  double t_lo = 0;
  double t_hi = 0;
  double residual = 0;  // max |theta - model| on the window nodes

  double b_minus1() const { return coefficients(0); }
  double b_0() const { return coefficients(1); }
  double b_1() const { return coefficients.size() > 2 ? coefficients(2) : 0.0; }
  double model(double t) const;
};

/// Least squares of theta against {1/t, 1, t, ...} with weights t^2.
AsymptoticFit fit_asymptotics(const HeatTraceSamples& samples, int terms = 3, double trunc_tol = 1e-8);
AsymptoticFit fit_asymptotics(const Spectrum& spectrum, const FitOptions& options = {});

/// Direct sum over nonzero eigenvalues; s > 1.
double zeta(const Spectrum& spectrum, double s);

struct ZetaTail {
  double direct = 0;         // sum over computed nonzero eigenvalues
  double tail = 0;           // Weyl estimate of the missing modes
  double uncertainty = 0;    // spread of the Weyl estimate
  double lambda_cut = 0;
};

/// Weyl-count tail for modes beyond the computed spectrum, N(lambda) ~ b_{-1} lambda + b_0.
ZetaTail zeta_with_tail(const Spectrum& spectrum, const AsymptoticFit& fit, double s);

struct MellinResult {
  double value = 0;
  double error = 0;
};

/// (1/Gamma(s)) int_0^inf t^{s-1} theta(t) dt with the fitted model below t_lo.
MellinResult zeta_mellin(const Spectrum& spectrum, const AsymptoticFit& fit, double s);

/// sum E1(lambda T) + int_0^T rho(t)/t dt - b_{-1}/T + b_0 (gamma + log T),
/// rho = theta - b_{-1}/t - b_0; the part on (0, t_lo) comes from the fitted model.
double zeta_prime_zero(const Spectrum& spectrum, const AsymptoticFit& fit, double t_split = 1.0);

struct ZetaPrimeParts {
  double e1_sum = 0;        // int_1^inf theta/t
  double rho_integral = 0;  // int_0^1 rho/t
  double value = 0;
  double statement_variant = 0;  // ... + gamma b_{-1} - b_0
  double proof_variant = 0;      // ... + b_{-1} + b_0
};
ZetaPrimeParts zeta_prime_parts(const Spectrum& spectrum, const AsymptoticFit& fit);

struct ZetaPrimeBudget {
  double fit_residual = 0;
  double truncation = 0;
  double window = 0;
  double model_order = 0;
  double total() const { return fit_residual + truncation + window + model_order; }
};

struct TorsionResult {
  AsymptoticFit fit;
  ZetaPrimeParts parts;
  double zeta_prime0 = 0;
  double zeta0 = 0;    // b_0 of the kernel-free trace
  double b0_full = 0;  // b_0 + kernel_dim
  ZetaPrimeBudget budget;
};

TorsionResult analyze_torsion(const Spectrum& spectrum, const FitOptions& options = {});

/// V diag(exp(-lambda t)) V^T M.
Eigen::MatrixXd heat_operator(const OperatorPair& pair, const Spectrum& spectrum, double t);

struct DuhamelResult {
  double residual = 0;
  double derivative_norm = 0;
  double relative = 0;
};

/// || (E_{u+h} - E_{u-h})/2h + int_0^t E_u(t-s) dDelta E_u(s) ds ||_M with
/// dDelta the centered difference of M^{-1}K; Gauss-Legendre in s.
DuhamelResult duhamel_residual(const OperatorPair& minus, const OperatorPair& mid, const OperatorPair& plus,
                               double h, double t, int nodes);

}  // namespace atorsion
