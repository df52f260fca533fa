#include "atorsion/eigensolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <vector>

namespace atorsion {

double Spectrum::lambda1() const {
  if (kernel_dim >= eigenvalues.size()) throw SpectrumError("spectrum of " + metric_id + " has no nonzero eigenvalue");
  return eigenvalues(kernel_dim);
}

int kernel_dimension(const Eigen::Ref<const Eigen::VectorXd>& ev) {
  // smallest k with every |lambda_i|, i < k, at most 1e-8 lambda_k
  double small = 0;
  for (Eigen::Index k = 1; k < ev.size(); ++k) {
    small = std::max(small, std::abs(ev(k - 1)));
    if (ev(k) > 0 && small <= 1e-8 * ev(k)) return static_cast<int>(k);
  }
  return 0;
}

namespace {

int degree_from_dim(Eigen::Index n) {
  const auto l = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  return l * l == n ? static_cast<int>(l - 1) : -1;
}

// Modified Gram-Schmidt in the M inner product within clusters of nearly equal
// eigenvalues; every column is M-normalized.
void m_orthonormalize(const Eigen::Ref<const Eigen::MatrixXd>& M, const Eigen::VectorXd& lambda, Eigen::MatrixXd& V) {
  const Eigen::Index n = V.cols();
  Eigen::MatrixXd MV(V.rows(), 0);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(lambda(end) - lambda(end - 1)) <= 1e-9 * std::max(1.0, std::abs(lambda(end)))) ++end;
    for (Eigen::Index j = start; j < end; ++j) {
      for (Eigen::Index i = start; i < j; ++i) {
        const double proj = V.col(i).dot(M * V.col(j));
        V.col(j) -= proj * V.col(i);
      }
      V.col(j) /= std::sqrt(V.col(j).dot(M * V.col(j)));
    }
    start = end;
  }
}

}  // namespace

Spectrum generalized_eigs(const Eigen::Ref<const Eigen::MatrixXd>& K, const Eigen::Ref<const Eigen::MatrixXd>& M,
                          const EigOptions& options) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n) throw DomainError("generalized_eigs: pencil shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw IndefiniteMassError("Cholesky factorization of the mass matrix failed");
  const auto Lf = llt.matrixL();

  // C = L^{-1} K L^{-T}
  Eigen::MatrixXd X = Lf.solve(K);
  Eigen::MatrixXd C = Lf.solve(X.transpose());
  C = 0.5 * (C + C.transpose()).eval();

  Spectrum out;
  out.basis_L = degree_from_dim(n);
  if (n == 0) return out;
  Eigen::VectorXd d(n), e = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Z;
  if (n == 1) {
    d(0) = C(0, 0);
    if (options.vectors) Z = Eigen::MatrixXd::Ones(1, 1);
  } else {
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(C);
    d = tri.diagonal();
    e.head(n - 1) = tri.subDiagonal();
    if (options.vectors) Z = tri.matrixQ();
  }
  tridiagonal_ql<double>(d, e, options.vectors ? &Z : nullptr, options.max_sweeps, options.tolerance);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b); });
  out.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) out.eigenvalues(k) = d(order[static_cast<std::size_t>(k)]);
  out.kernel_dim = kernel_dimension(out.eigenvalues);

  if (options.vectors) {
    Eigen::MatrixXd Zs(n, n);
    for (Eigen::Index k = 0; k < n; ++k) Zs.col(k) = Z.col(order[static_cast<std::size_t>(k)]);
    out.eigenvectors = Lf.transpose().solve(Zs);
    m_orthonormalize(M, out.eigenvalues, out.eigenvectors);
  }
  return out;
}

Spectrum generalized_eigs(const OperatorPair& pair, const EigOptions& options) {
  Spectrum s = generalized_eigs(pair.K, pair.M, options);
  s.metric_id = pair.metric_id;
  return s;
}

double max_relative_residual(const OperatorPair& pair, const Spectrum& spectrum) {
  if (!spectrum.has_vectors()) throw SpectrumError("residual check needs eigenvectors");
  const double nk = pair.K.operatorNorm(), nm = pair.M.operatorNorm();
  const Eigen::MatrixXd KV = pair.K * spectrum.eigenvectors;
  const Eigen::MatrixXd MV = pair.M * spectrum.eigenvectors;
  double worst = 0;
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    const double lam = spectrum.eigenvalues(k);
    const double r = (KV.col(k) - lam * MV.col(k)).norm() / (nk + std::abs(lam) * nm);
    worst = std::max(worst, r);
  }
  return worst;
}

double m_orthonormality_error(const Eigen::Ref<const Eigen::MatrixXd>& M, const Spectrum& spectrum) {
  if (!spectrum.has_vectors()) throw SpectrumError("orthonormality check needs eigenvectors");
  const Eigen::MatrixXd G = spectrum.eigenvectors.transpose() * M * spectrum.eigenvectors;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd resolvent(const OperatorPair& pair, const Spectrum& spectrum) {
  return spectral_function(pair, spectrum, [](double l) { return 1.0 / (1.0 + l); });
}

Eigen::MatrixXd resolvent(const OperatorPair& pair) { return resolvent(pair, generalized_eigs(pair)); }

double m_operator_norm(const Eigen::Ref<const Eigen::MatrixXd>& M, const Eigen::Ref<const Eigen::MatrixXd>& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw IndefiniteMassError("inner-product Gram matrix is not positive definite");
  // L^T A L^{-T}
  const Eigen::MatrixXd LtA = llt.matrixU() * A;
  const Eigen::MatrixXd B = llt.matrixL().solve(LtA.transpose()).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B);
  return svd.singularValues()(0);
}

}  // namespace atorsion
