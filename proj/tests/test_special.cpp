#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "atorsion/special.hpp"

using namespace atorsion;

TEST(ExpintE1, ReferenceValues) {
  EXPECT_NEAR(expint_e1(0.01), 4.0379295765381135, 1e-14);
  EXPECT_NEAR(expint_e1(0.5), 0.55977359477616081, 1e-15);
  EXPECT_NEAR(expint_e1(1.0), 0.21938393439552029, 1e-15);
  EXPECT_NEAR(expint_e1(2.0), 0.048900510708061020, 1e-16);
  EXPECT_NEAR(expint_e1(10.0) / 4.1569689296853243e-06, 1.0, 1e-13);
  EXPECT_NEAR(expint_e1(50.0) / 3.7832640295504591e-24, 1.0, 1e-13);
}

TEST(ExpintE1, ContinuousAcrossBranchPoint) {
  const double below = expint_e1(std::nextafter(1.0, 0.0));
  const double above = expint_e1(1.0);
  EXPECT_NEAR(below, above, 1e-14);
}

TEST(ExpintE1, UnderflowsToZero) { EXPECT_EQ(expint_e1(800.0), 0.0); }

TEST(IntegrateAdaptive, SmoothAndPeaked) {
  const auto r = integrate_adaptive([](double x) { return std::exp(-x); }, 0, 5);
  EXPECT_NEAR(r.value, 1 - std::exp(-5.0), 1e-13);
  const auto peak = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1, 1);
  EXPECT_NEAR(peak.value, 2 * std::atan(100.0) / 1e-2, 1e-8);
}

TEST(IntegrateAdaptive, Deterministic) {
  auto f = [](double x) { return std::sin(30 * x) * std::exp(-x); };
  const auto a = integrate_adaptive(f, 0, 3);
  const auto b = integrate_adaptive(f, 0, 3);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Richardson, RecoversLimitOfExactModel) {
  Eigen::VectorXd p(3), v(3);
  p << 8, 16, 32;
  for (int i = 0; i < 3; ++i) v(i) = 1.5 + 2 / (p(i) * p(i)) - 7 / std::pow(p(i), 3);
  const auto e = richardson_extrapolate(p, v, Eigen::Vector2d(2, 3));
  EXPECT_NEAR(e.limit, 1.5, 1e-13);
  EXPECT_NEAR(e.coefficients(0), 2, 1e-9);
}
