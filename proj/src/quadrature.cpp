#include "atorsion/quadrature.hpp"

#include <vector>

#include "atorsion/errors.hpp"

namespace atorsion {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

QuadratureRule::QuadratureRule(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw ResolutionError("quadrature node counts must be positive");
  const auto [g, gw] = gauss_legendre<double>(n_theta);
  x_.resize(2 * n_theta);
  ring_w_.resize(2 * n_theta);
  for (int i = 0; i < n_theta; ++i) {
    // panel [-1, 0] then [0, 1]; each panel maps [-1,1] with half-width 1/2
    x_(i) = 0.5 * (g(i) - 1.0);
    x_(n_theta + i) = 0.5 * (g(i) + 1.0);
    ring_w_(i) = 0.25 * gw(i);
    ring_w_(n_theta + i) = 0.25 * gw(i);
  }
  theta_ = x_.array().acos();
  phi_.resize(n_phi);
  for (int j = 0; j < n_phi; ++j) phi_(j) = 2.0 * std::numbers::pi * j / n_phi;
}

Eigen::VectorXd QuadratureRule::weights() const {
  Eigen::VectorXd w(size());
  for (int r = 0; r < rings(); ++r) w.segment(node(r, 0), n_phi_).setConstant(ring_w_(r) / n_phi_);
  return w;
}

double QuadratureRule::integrate(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  std::vector<double> terms(static_cast<std::size_t>(size()));
  for (Eigen::Index k = 0; k < size(); ++k) terms[static_cast<std::size_t>(k)] = weight(k) * values(k);
  return pairwise_sum(terms);
}

}  // namespace atorsion
