#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "atorsion/discretization.hpp"
#include "atorsion/eigensolve.hpp"
#include "atorsion/errors.hpp"

using namespace atorsion;

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  return A * A.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(TridiagonalQL, MatchesDenseSolver) {
  const int n = 40;
  Eigen::VectorXd d(n), e(n);
  for (int i = 0; i < n; ++i) {
    d(i) = std::sin(i + 1.0) * 3;
    e(i) = std::cos(0.7 * i);
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  T.diagonal() = d;
  T.diagonal(1) = e.head(n - 1);
  T.diagonal(-1) = e.head(n - 1);
  Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues();
  tridiagonal_ql<double>(d, e, nullptr);
  std::sort(d.data(), d.data() + n);
  EXPECT_LT((d - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TridiagonalQL, ReportsStuckIndex) {
  Eigen::VectorXd d(3), e(3);
  d << 1, 2, 3;
  e << 1, 1, 0;
  try {
    tridiagonal_ql<double>(d, e, nullptr, 0);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& err) {
    EXPECT_EQ(err.stuck_index(), 0);
  }
}

TEST(GeneralizedEigs, RandomPencilResidualsAndOrthonormality) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd K = random_spd(30, rng), M = random_spd(30, rng);
  const Spectrum s = generalized_eigs(K, M);
  const OperatorPair pair{K, M, "random"};
  EXPECT_LT(max_relative_residual(pair, s), 1e-12);
  EXPECT_LT(m_orthonormality_error(M, s), 1e-12);
  for (Eigen::Index i = 1; i < s.size(); ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
}

TEST(GeneralizedEigs, IndefiniteMassRaises) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
  M(2, 2) = -1;
  EXPECT_THROW(generalized_eigs(Eigen::MatrixXd::Identity(3, 3), M), IndefiniteMassError);
}

TEST(GeneralizedEigs, FubiniStudyMultiplicities) {
  const SpectralBasis b = build_basis(12);
  const Spectrum s = generalized_eigs(assemble(b, fs_metric()));
  EXPECT_EQ(s.kernel_dim, 1);
  for (int l = 0; l <= 12; ++l) {
    for (int m = -l; m <= l; ++m) {
      const double lam = s.eigenvalues(SpectralBasis::flat_index(l, m));
      EXPECT_NEAR(lam, l * (l + 1) / 2.0, 1e-10 * (1 + l * l));
    }
  }
  EXPECT_LT(m_orthonormality_error(assemble(b, fs_metric()).M, s), 1e-12);
}

TEST(GeneralizedEigs, KernelIsConstantsForEveryMetric) {
  const SpectralBasis b = build_basis(10);
  for (const auto& m : {fs_metric(), pnorm_metric(4), max_metric(), soft_max_metric(6)}) {
    const Spectrum s = generalized_eigs(assemble(b, m), EigOptions{.vectors = false});
    EXPECT_EQ(s.kernel_dim, 1) << m.id();
    EXPECT_LE(std::abs(s.eigenvalues(0)), 1e-8 * s.eigenvalues(1)) << m.id();
  }
}

TEST(KernelDimension, CountsNearZeroEigenvalues) {
  Eigen::VectorXd v(4);
  v << 1e-15, 2e-14, 1.0, 2.0;
  EXPECT_EQ(kernel_dimension(v), 2);
  v << 0.5, 1, 2, 3;
  EXPECT_EQ(kernel_dimension(v), 0);
}

TEST(Resolvent, InvertsIPlusLaplacian) {
  const SpectralBasis b = build_basis(6);
  const OperatorPair pair = assemble(b, pnorm_metric(2));
  const Eigen::MatrixXd R = resolvent(pair);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b.dim(), b.dim());
  const Eigen::MatrixXd Delta = apply_laplacian(pair, I);
  EXPECT_LT(((I + Delta) * R - I).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(m_operator_norm(pair.M, R), 1.0, 1e-12);  // the kernel gives 1
}

TEST(MOperatorNorm, ScalingOfInnerProductLeavesNormUnchanged) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd M = random_spd(8, rng);
  const Eigen::MatrixXd A = random_spd(8, rng);
  EXPECT_NEAR(m_operator_norm(M, A), m_operator_norm(7 * M, A), 1e-12 * m_operator_norm(M, A));
}
