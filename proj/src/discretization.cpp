#include "atorsion/discretization.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "atorsion/errors.hpp"

namespace atorsion {

void legendre_table(int L, double x, Eigen::MatrixXd& p, Eigen::MatrixXd& dp) {
  p.setZero(L + 1, L + 1);
  dp.setZero(L + 1, L + 1);
  const double s = std::sqrt(std::max(0.0, (1 - x) * (1 + x)));
  double pmm = 1.0;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m - 1) / (2.0 * m)) * s;
    p(m, m) = std::sqrt(2.0 * m + 1) * pmm;
    if (m + 1 <= L) p(m + 1, m) = x * std::sqrt(2.0 * m + 3) * p(m, m);
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                                 (4.0 * (l - 1) * (l - 1) - 1));
      p(l, m) = a * (x * p(l - 1, m) - b * p(l - 2, m));
    }
  }
  if (s == 0) return;
  for (int m = 0; m <= L; ++m)
    for (int l = m; l <= L; ++l) {
      double v = l * x * p(l, m);
      if (l > m)
        v -= std::sqrt((2.0 * l + 1) * (static_cast<double>(l) * l - static_cast<double>(m) * m) / (2.0 * l - 1)) *
             p(l - 1, m);
      dp(l, m) = v / s;
    }
}

double real_harmonic(int l, int m, double x, double phi) {
  Eigen::MatrixXd p, dp;
  legendre_table(l, x, p, dp);
  const int am = std::abs(m);
  if (m == 0) return p(l, 0);
  if (m > 0) return std::numbers::sqrt2 * p(l, am) * std::cos(am * phi);
  return std::numbers::sqrt2 * p(l, am) * std::sin(am * phi);
}

HarmonicIndex SpectralBasis::harmonic_index(Eigen::Index i) {
  const int l = static_cast<int>(std::sqrt(static_cast<double>(i)));
  int ll = l;
  while (static_cast<Eigen::Index>(ll + 1) * (ll + 1) <= i) ++ll;
  while (static_cast<Eigen::Index>(ll) * ll > i) --ll;
  return {ll, static_cast<int>(i - static_cast<Eigen::Index>(ll) * ll - ll)};
}

SpectralBasis::SpectralBasis(int L, int n_theta, int n_phi) : L_(L), rule_(std::max(n_theta, 1), std::max(n_phi, 1)) {
  if (L < 0) throw ResolutionError("basis degree L must be >= 0");
  if (n_theta < 2 * L + 2)
    throw ResolutionError("quadrature too coarse: N_theta = " + std::to_string(n_theta) +
                          " per panel violates N_theta >= 2L+2 = " + std::to_string(2 * L + 2));
  if (n_phi < 2 * L + 2)
    throw ResolutionError("quadrature too coarse: N_phi = " + std::to_string(n_phi) +
                          " violates N_phi >= 2L+2 = " + std::to_string(2 * L + 2));

  const Eigen::Index n = dim();
  values_.resize(rule_.size(), n);
  stiffness_.setZero(n, n);
  Eigen::MatrixXd p, dp;
  Eigen::MatrixXd cosm(n_phi, L + 1), sinm(n_phi, L + 1);
  for (int j = 0; j < n_phi; ++j)
    for (int m = 0; m <= L; ++m) {
      cosm(j, m) = std::cos(m * rule_.phi()(j));
      sinm(j, m) = std::sin(m * rule_.phi()(j));
    }

  Eigen::MatrixXd ga(n_phi, n), gb(n_phi, n);
  for (int ring = 0; ring < rule_.rings(); ++ring) {
    const double x = rule_.cos_theta()(ring);
    const double sin_t = std::sqrt((1 - x) * (1 + x));
    legendre_table(L, x, p, dp);

    // Chart of this ring and the Jacobian of (theta, phi) -> (r, psi), where
    // the chart coordinate is r e^{i psi}.
    const ChartPoint cp = chart_point_from_sphere(x, 0.0);
    const double r = std::abs(cp.z);
    const double q = 1 + r * r;
    const double dtheta_dr = (cp.chart == 0 ? 2.0 : -2.0) / q;
    const double dphi_dpsi = cp.chart == 0 ? 1.0 : -1.0;
    // Re(dY_i/dzbar conj dY_j/dzbar) dxdy/pi = (a_i a_j + b_i b_j) dmu with
    // a = (1+r^2)/2 dY/dr and b = (1+r^2)/(2r) dY/dpsi.
    const double ja = 0.5 * q * dtheta_dr;
    const double jb = 0.5 * q / r * dphi_dpsi;

    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        const Eigen::Index i = flat_index(l, m);
        const int am = std::abs(m);
        const double pv = p(l, am), dv = dp(l, am);
        for (int j = 0; j < n_phi; ++j) {
          double y, yt, yp;
          if (m == 0) {
            y = pv;
            yt = dv;
            yp = 0;
          } else if (m > 0) {
            y = std::numbers::sqrt2 * pv * cosm(j, am);
            yt = std::numbers::sqrt2 * dv * cosm(j, am);
            yp = -std::numbers::sqrt2 * am * pv * sinm(j, am);
          } else {
            y = std::numbers::sqrt2 * pv * sinm(j, am);
            yt = std::numbers::sqrt2 * dv * sinm(j, am);
            yp = std::numbers::sqrt2 * am * pv * cosm(j, am);
          }
          values_(rule_.node(ring, j), i) = y;
          ga(j, i) = ja * yt;
          gb(j, i) = (sin_t > 0 ? jb : 0.0) * yp;
        }
      }
    const double sw = std::sqrt(rule_.ring_weights()(ring) / n_phi);
    ga *= sw;
    gb *= sw;
    stiffness_.selfadjointView<Eigen::Lower>().rankUpdate(ga.transpose());
    stiffness_.selfadjointView<Eigen::Lower>().rankUpdate(gb.transpose());
  }
  stiffness_ = stiffness_.selfadjointView<Eigen::Lower>();
  stiffness_.row(0).setZero();
  stiffness_.col(0).setZero();

  const Eigen::MatrixXd gram = weighted_gram(*this, Eigen::VectorXd::Ones(rule_.size()));
  gram_error_ = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(gram_error_ < 1e-10))
    throw ResolutionError("basis Gram matrix deviates from identity by " + std::to_string(gram_error_));
}

SpectralBasis build_basis(int L, int n_theta, int n_phi) { return SpectralBasis(L, n_theta, n_phi); }

SpectralBasis build_basis(int L) { return SpectralBasis(L, 2 * L + 2, 2 * L + 2); }

const Eigen::MatrixXd& stiffness(const SpectralBasis& basis) { return basis.stiffness(); }

Eigen::MatrixXd weighted_gram(const SpectralBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& density) {
  const QuadratureRule& rule = basis.rule();
  if (density.size() != rule.size()) throw DomainError("weighted_gram: density size does not match the rule");
  const Eigen::VectorXd wd = rule.weights().cwiseProduct(density);
  const Eigen::MatrixXd scaled = basis.values().array().colwise() * wd.array();
  Eigen::MatrixXd g = basis.values().transpose() * scaled;
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd mass(const SpectralBasis& basis, const ConformalMetric& metric) {
  return weighted_gram(basis, node_densities(metric, basis.rule()));
}

OperatorPair assemble(const SpectralBasis& basis, const ConformalMetric& metric) {
  return {basis.stiffness(), mass(basis, metric), metric.id()};
}

Eigen::MatrixXd apply_laplacian(const OperatorPair& pair, const Eigen::Ref<const Eigen::MatrixXd>& v) {
  Eigen::LLT<Eigen::MatrixXd> llt(pair.M);
  if (llt.info() != Eigen::Success) throw IndefiniteMassError("mass matrix of " + pair.metric_id + " is not positive definite");
  return llt.solve(pair.K * v);
}

}  // namespace atorsion
