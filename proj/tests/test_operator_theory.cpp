#include <gtest/gtest.h>

#include <random>

#include "atorsion/errors.hpp"
#include "atorsion/operator_theory.hpp"

using namespace atorsion;

namespace {

struct Gen {
  std::mt19937_64 rng;
  std::normal_distribution<double> g;
  explicit Gen(unsigned seed) : rng(seed) {}
  Eigen::MatrixXd matrix(int n) {
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
    return A;
  }
  Eigen::MatrixXd spd(int n) {
    const Eigen::MatrixXd A = matrix(n);
    return A * A.transpose() + 0.5 * n * Eigen::MatrixXd::Identity(n, n);
  }
};

}  // namespace

TEST(TraceNorm, LidskiiOnRandomInstances) {
  Gen gen(1);
  for (int k = 0; k < 100; ++k) {
    const int n = 4 + k % 13;
    const InnerProduct ip(gen.spd(n));
    const Eigen::MatrixXd A = gen.matrix(n);
    EXPECT_LE(lidskii_residual(A, ip), 1e-10 * trace_norm(A, ip)) << k;
  }
}

TEST(TraceNorm, TraceBoundedByTraceNorm) {
  Gen gen(2);
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + k % 11;
    const InnerProduct ip(gen.spd(n));
    const Eigen::MatrixXd A = gen.matrix(n);
    EXPECT_LE(std::abs(A.trace()), trace_norm(A, ip) * (1 + 1e-12)) << k;
  }
}

TEST(TraceNorm, IdealProperty) {
  Gen gen(3);
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + k % 9;
    const InnerProduct ip(gen.spd(n));
    const Eigen::MatrixXd A = gen.matrix(n), T = gen.matrix(n), B = gen.matrix(n);
    const double lhs = trace_norm(A * T * B, ip);
    const double rhs = operator_norm(A, ip) * trace_norm(T, ip) * operator_norm(B, ip);
    EXPECT_LE(lhs, rhs * (1 + 1e-12)) << k;
  }
}

TEST(TraceNorm, EquivalentInnerProducts) {
  Gen gen(4);
  for (int k = 0; k < 100; ++k) {
    const int n = 3 + k % 10;
    const InnerProduct ip1(gen.spd(n)), ip2(gen.spd(n));
    const EquivalenceBounds b = equivalence_bounds(gen.matrix(n), ip1, ip2);
    EXPECT_TRUE(b.holds()) << k << ": ratio " << b.ratio << " not in [" << b.lower << ", " << b.upper << "]";
    EXPECT_GE(b.epsilon, 0);
    EXPECT_LT(b.epsilon, 1);
  }
}

TEST(TraceNorm, CommonScalingIsInvisible) {
  Gen gen(5);
  const Eigen::MatrixXd G = gen.spd(6), A = gen.matrix(6);
  const InnerProduct ip1(G), ip2(9 * G);
  EXPECT_NEAR(trace_norm(A, ip1), trace_norm(A, ip2), 1e-12 * trace_norm(A, ip1));
  const EquivalenceBounds b = equivalence_bounds(A, ip1, ip2);
  EXPECT_NEAR(b.epsilon, 0, 1e-12);
}

TEST(OperatorNorm, MatchesRankOneLocalSearch) {
  Gen gen(6);
  for (int k = 0; k < 20; ++k) {
    const int n = 5;
    const InnerProduct ip = InnerProduct::identity(n);
    const Eigen::MatrixXd A = gen.matrix(n);
    // alternating maximization of y^T A x over unit vectors, several restarts
    double best = 0;
    for (int restart = 0; restart < 5; ++restart) {
      Eigen::VectorXd x = gen.matrix(n).col(0).normalized(), y;
      for (int it = 0; it < 500; ++it) {
        y = (A * x).normalized();
        x = (A.transpose() * y).normalized();
      }
      best = std::max(best, std::abs(y.dot(A * x)));
    }
    EXPECT_NEAR(best, operator_norm(A, ip), 1e-8 * best) << k;
  }
}

TEST(InnerProduct, AdjointIsAdjoint) {
  Gen gen(7);
  const Eigen::MatrixXd G = gen.spd(5), A = gen.matrix(5);
  const InnerProduct ip(G);
  const Eigen::VectorXd x = gen.matrix(5).col(0), y = gen.matrix(5).col(1);
  EXPECT_NEAR((A * x).dot(G * y), x.dot(G * (ip.adjoint(A) * y)), 1e-10);
}

TEST(InnerProduct, IndefiniteGramRejected) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(3, 3);
  G(1, 1) = -2;
  EXPECT_THROW(InnerProduct{G}, IndefiniteMassError);
}

TEST(Fatou, SumOfLiminfBelowLiminfOfSums) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> a(40, std::vector<double>(15));
  for (auto& row : a)
    for (double& v : row) v = u(rng);
  const auto [sum_liminf, liminf_sum] = fatou_sums(a, 10);
  EXPECT_LE(sum_liminf, liminf_sum);
}

TEST(Fatou, TailLiminf) {
  const std::vector<double> v{5, 1, 3, 2, 4};
  EXPECT_EQ(tail_liminf(v, 2), 2);
  EXPECT_THROW(tail_liminf(v, 5), DomainError);
}
