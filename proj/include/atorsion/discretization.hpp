#pragma once

#include <Eigen/Core>
#include <string>

#include "atorsion/metrics.hpp"
#include "atorsion/quadrature.hpp"

namespace atorsion {

struct HarmonicIndex {
  int l = 0;
  int m = 0;
};

/// Real spherical harmonics of degree <= L, orthonormal for the normalized
/// round measure, tabulated on a QuadratureRule. Index i = l^2 + l + m, so
/// index 0 is the constant function 1.
class SpectralBasis {
 public:
  SpectralBasis(int L, int n_theta, int n_phi);

  int L() const { return L_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(L_ + 1) * (L_ + 1); }
  const QuadratureRule& rule() const { return rule_; }
  /// Basis values, one row per quadrature node.
  const Eigen::MatrixXd& values() const { return values_; }
  /// Dirichlet form of the basis; metric-free.
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  double gram_error() const { return gram_error_; }

  static Eigen::Index flat_index(int l, int m) { return static_cast<Eigen::Index>(l) * l + l + m; }
  static HarmonicIndex harmonic_index(Eigen::Index i);

 private:
  int L_;
  QuadratureRule rule_;
  Eigen::MatrixXd values_;
  Eigen::MatrixXd stiffness_;
  double gram_error_ = 0;
};

/// Throws ResolutionError unless n_theta (per panel) and n_phi are >= 2L+2.
SpectralBasis build_basis(int L, int n_theta, int n_phi);
/// Basis with the minimal exact rule n_theta = n_phi = 2L+2.
SpectralBasis build_basis(int L);

/// Normalized associated Legendre functions and their theta-derivatives at
/// x = cos(theta): p(l, m) with int p^2 dx/2 = 1. Only m <= l is filled.
void legendre_table(int L, double x, Eigen::MatrixXd& p, Eigen::MatrixXd& dp_dtheta);

/// Real spherical harmonic Y_{l,m} at (x = cos theta, phi).
double real_harmonic(int l, int m, double x, double phi);

/// K_ij = (i/2pi) int dY_i/dzbar dY_j/dz dz ^ dzbar.
const Eigen::MatrixXd& stiffness(const SpectralBasis& basis);

/// B^T diag(w * density) B for arbitrary per-node densities.
Eigen::MatrixXd weighted_gram(const SpectralBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& density);

/// L^2 product of the metric: M_ij = int Y_i Y_j omega.
Eigen::MatrixXd mass(const SpectralBasis& basis, const ConformalMetric& metric);

struct OperatorPair {
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;
  std::string metric_id;
};

OperatorPair assemble(const SpectralBasis& basis, const ConformalMetric& metric);

/// Discrete Laplacian applied to coefficient vectors: M^{-1} K v.
Eigen::MatrixXd apply_laplacian(const OperatorPair& pair, const Eigen::Ref<const Eigen::MatrixXd>& v);

}  // namespace atorsion
