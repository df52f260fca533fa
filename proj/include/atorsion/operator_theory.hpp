#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "atorsion/eigensolve.hpp"
#include "atorsion/errors.hpp"

namespace atorsion {

/// Inner product <x, y> = x^T G y on coefficient space.
class InnerProduct {
 public:
  explicit InnerProduct(Eigen::MatrixXd gram) : gram_(std::move(gram)), llt_(gram_) {
    if (gram_.rows() != gram_.cols() || llt_.info() != Eigen::Success)
      throw IndefiniteMassError("inner-product Gram matrix is not symmetric positive definite");
  }
  static InnerProduct identity(Eigen::Index n) { return InnerProduct(Eigen::MatrixXd::Identity(n, n)); }

  const Eigen::MatrixXd& gram() const { return gram_; }
  Eigen::Index dim() const { return gram_.rows(); }

  /// Matrix of A in a G-orthonormal basis: L^T A L^{-T} with G = L L^T.
  template <typename Derived>
  Eigen::MatrixXd orthonormal_form(const Eigen::MatrixBase<Derived>& A) const {
    const Eigen::MatrixXd LtA = llt_.matrixU() * A;
    return llt_.matrixL().solve(LtA.transpose()).transpose();
  }

  /// Adjoint G^{-1} A^T G.
  template <typename Derived>
  Eigen::MatrixXd adjoint(const Eigen::MatrixBase<Derived>& A) const {
    return llt_.solve(A.transpose() * gram_);
  }

 private:
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Singular values w.r.t. the inner product, descending.
template <typename Derived>
Eigen::VectorXd singular_values(const Eigen::MatrixBase<Derived>& A, const InnerProduct& ip) {
  if (A.rows() != A.cols() || A.rows() != ip.dim()) throw DomainError("singular_values: shape mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ip.orthonormal_form(A));
  return svd.singularValues();
}

template <typename Derived>
double trace_norm(const Eigen::MatrixBase<Derived>& A, const InnerProduct& ip) {
  return singular_values(A, ip).sum();
}

template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& A, const InnerProduct& ip) {
  return singular_values(A, ip)(0);
}

/// |Tr(A) - sum of eigenvalues of A|.
template <typename Derived>
double lidskii_residual(const Eigen::MatrixBase<Derived>& A, const InnerProduct& ip) {
  const Eigen::MatrixXd B = ip.orthonormal_form(A);
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("lidskii_residual: eigenvalue iteration failed", 0);
  return std::abs(A.trace() - es.eigenvalues().real().sum());
}

struct EquivalenceBounds {
  double kappa_low = 1;   // kappa_low G1 <= G2
  double kappa_high = 1;  // G2 <= kappa_high G1
  double epsilon = 0;     // (1+eps)/(1-eps) = sqrt(kappa_high/kappa_low)
  double lower = 1;       // (1-eps)/(1+eps)
  double upper = 1;       // (1+eps)/(1-eps)
  double ratio = 1;       // ||A||_{1,ip2} / ||A||_{1,ip1}
  bool holds() const { return ratio >= lower * (1 - 1e-12) && ratio <= upper * (1 + 1e-12); }
};

/// Trace-norm comparison between two inner products. The trace norm of an
/// operator is invariant under a common scaling of the inner product, so
/// only the spread kappa_high/kappa_low enters.
template <typename Derived>
EquivalenceBounds equivalence_bounds(const Eigen::MatrixBase<Derived>& A, const InnerProduct& ip1,
                                     const InnerProduct& ip2) {
  const Spectrum rel = generalized_eigs(ip2.gram(), ip1.gram(), EigOptions{.vectors = false});
  EquivalenceBounds b;
  b.kappa_low = rel.eigenvalues(0);
  b.kappa_high = rel.eigenvalues(rel.size() - 1);
  const double r = std::sqrt(b.kappa_high / b.kappa_low);
  b.epsilon = (r - 1) / (r + 1);
  b.lower = (1 - b.epsilon) / (1 + b.epsilon);
  b.upper = (1 + b.epsilon) / (1 - b.epsilon);
  b.ratio = trace_norm(A, ip2) / trace_norm(A, ip1);
  return b;
}

/// Projector onto the M-orthogonal complement of the kernel, V diag(0..0,1..1) V^T M.
inline Eigen::MatrixXd kernel_complement_projector(const OperatorPair& pair, const Spectrum& spectrum) {
  return spectral_function(pair, spectrum, [](double l) { return l == 0.0 ? 0.0 : 1.0; });
}

/// ||P E(t)||_1 in the M inner product.
double heat_trace_norm(const OperatorPair& pair, const Spectrum& spectrum, double t);

/// min over the tail seq[start..] (finite stand-in for liminf).
inline double tail_liminf(std::span<const double> seq, std::size_t start) {
  if (start >= seq.size()) throw DomainError("tail_liminf: empty tail");
  return *std::min_element(seq.begin() + static_cast<std::ptrdiff_t>(start), seq.end());
}

/// a[u][n], u the sequence index: returns (sum_n liminf_u a, liminf_u sum_n a).
inline std::pair<double, double> fatou_sums(const std::vector<std::vector<double>>& a, std::size_t start) {
  if (a.empty()) throw DomainError("fatou_sums: empty array");
  const std::size_t cols = a.front().size();
  double sum_of_liminf = 0;
  std::vector<double> col(a.size()), row_sums(a.size(), 0.0);
  for (std::size_t n = 0; n < cols; ++n) {
    for (std::size_t u = 0; u < a.size(); ++u) {
      col[u] = a[u].at(n);
      row_sums[u] += col[u];
    }
    sum_of_liminf += tail_liminf(col, start);
  }
  return {sum_of_liminf, tail_liminf(row_sums, start)};
}

}  // namespace atorsion
