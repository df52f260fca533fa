#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <utility>

namespace atorsion {

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
template <typename Scalar = double>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
gauss_legendre(int n) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec x(n), w(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = std::cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar pp = 1;
    for (int it = 0; it < 100; ++it) {
      Scalar p1 = 1, p2 = 0;
      for (int j = 1; j <= n; ++j) {
        const Scalar p3 = p2;
        p2 = p1;
        p1 = ((2 * j - 1) * z * p2 - (j - 1) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1);
      const Scalar dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 2 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    const Scalar wi = 2 / ((1 - z * z) * pp * pp);
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = wi;
    w(n - 1 - i) = wi;
  }
  if (n % 2 == 1) x(n / 2) = 0;
  return {x, w};
}

/// Pairwise (cascade) summation; fixed reduction order.
double pairwise_sum(std::span<const double> v);

/// Tensor rule on the sphere: Gauss-Legendre in x = cos(theta) on the two
/// panels [-1, 0] and [0, 1] (split at the equator), trapezoid in phi.
/// Weights are normalized so that they sum to 1 (normalized round measure).
class QuadratureRule {
 public:
  /// n_theta is the node count per panel.
  QuadratureRule(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int rings() const { return 2 * n_theta_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(rings()) * n_phi_; }

  /// Ring data, ordered south to north.
  const Eigen::VectorXd& cos_theta() const { return x_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& ring_weights() const { return ring_w_; }
  const Eigen::VectorXd& phi() const { return phi_; }

  /// Flattened node index = ring * n_phi + j.
  Eigen::Index node(int ring, int j) const { return static_cast<Eigen::Index>(ring) * n_phi_ + j; }
  double weight(Eigen::Index k) const { return ring_w_(k / n_phi_) / n_phi_; }
  Eigen::VectorXd weights() const;

  /// Deterministic weighted sum of per-node values.
  double integrate(const Eigen::Ref<const Eigen::VectorXd>& values) const;

 private:
  int n_theta_;
  int n_phi_;
  Eigen::VectorXd x_, theta_, ring_w_, phi_;
};

}  // namespace atorsion
