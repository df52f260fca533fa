#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "atorsion/discretization.hpp"
#include "atorsion/errors.hpp"

using namespace atorsion;

TEST(Basis, GramIsIdentityOnMinimalRule) {
  for (int L : {0, 1, 4, 12}) {
    const SpectralBasis b = build_basis(L);
    EXPECT_LT(b.gram_error(), 1e-13) << L;
    EXPECT_EQ(b.dim(), (L + 1) * (L + 1));
  }
}

TEST(Basis, UnderResolvedRuleNamesBound) {
  try {
    build_basis(8, 17, 18);
    FAIL() << "expected ResolutionError";
  } catch (const ResolutionError& e) {
    EXPECT_NE(std::string(e.what()).find("18"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_basis(8, 18, 10), ResolutionError);
}

TEST(Basis, IndexRoundTrip) {
  for (Eigen::Index i = 0; i < 50; ++i) {
    const HarmonicIndex h = SpectralBasis::harmonic_index(i);
    EXPECT_LE(std::abs(h.m), h.l);
    EXPECT_EQ(SpectralBasis::flat_index(h.l, h.m), i);
  }
}

TEST(Basis, RealHarmonicLowDegrees) {
  // orthonormal for the normalized measure: Y_10 = sqrt(3) x
  EXPECT_NEAR(real_harmonic(0, 0, 0.3, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(real_harmonic(1, 0, 0.3, 1.0), std::sqrt(3.0) * 0.3, 1e-15);
  EXPECT_NEAR(std::abs(real_harmonic(1, 1, 0.0, 0.0)), std::sqrt(3.0), 1e-14);
}

TEST(Stiffness, DiagonalLaplaceEigenvalues) {
  const SpectralBasis b = build_basis(10);
  const Eigen::MatrixXd& K = stiffness(b);
  for (Eigen::Index i = 0; i < b.dim(); ++i) {
    const int l = SpectralBasis::harmonic_index(i).l;
    EXPECT_NEAR(K(i, i), l * (l + 1.0), 1e-11 * (1 + l * l));
  }
  Eigen::MatrixXd off = K;
  off.diagonal().setZero();
  EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mass, FubiniStudyMassIsTwiceIdentity) {
  const SpectralBasis b = build_basis(6);
  const Eigen::MatrixXd M = mass(b, fs_metric());
  EXPECT_LT((M - 2 * Eigen::MatrixXd::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Mass, SymmetricPositiveForSingularMetric) {
  const SpectralBasis b = build_basis(8);
  const Eigen::MatrixXd M = mass(b, max_metric());
  EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff(), 0);
}

TEST(Laplacian, Y10IsEigenfunctionForFubiniStudy) {
  const SpectralBasis b = build_basis(6);
  const OperatorPair pair = assemble(b, fs_metric());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.dim());
  v(SpectralBasis::flat_index(1, 0)) = 1;
  const Eigen::VectorXd r = apply_laplacian(pair, v) - 1.0 * v;
  EXPECT_LT(r.norm(), 1e-12);
}

TEST(Laplacian, ConstantsInKernel) {
  const SpectralBasis b = build_basis(6);
  const OperatorPair pair = assemble(b, pnorm_metric(3));
  Eigen::VectorXd one = Eigen::VectorXd::Zero(b.dim());
  one(0) = 1;
  EXPECT_LT(apply_laplacian(pair, one).norm(), 1e-12);
}
