#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "atorsion/errors.hpp"
#include "atorsion/metrics.hpp"
#include "atorsion/quadrature.hpp"

using namespace atorsion;

namespace {

ChartPoint at(double x, double phi) { return chart_point_from_sphere(x, phi); }

double c1_total(const ConformalMetric& m, const QuadratureRule& rule) {
  Eigen::VectorXd v(rule.size());
  for (Eigen::Index k = 0; k < rule.size(); ++k) v(k) = chern_c1_density(m, rule_point(rule, k));
  return rule.integrate(v);
}

}  // namespace

TEST(Metrics, FubiniStudyDensityIsConstant) {
  const ConformalMetric fs = fs_metric();
  for (double x : {-0.9, -0.2, 0.0, 0.4, 0.99}) EXPECT_NEAR(fs.density(at(x, 1.0)), 2.0, 1e-14);
}

TEST(Metrics, ChartTransitionPreservesDensity) {
  for (const auto& m : {fs_metric(), pnorm_metric(3), soft_max_metric(5), max_metric()}) {
    for (double x : {-0.7, -0.1, 0.3, 0.8}) {
      const ChartPoint p = at(x, 0.6);
      EXPECT_NEAR(m.density(p), m.density(p.other()), 1e-12 * m.density(p)) << m.id();
    }
  }
}

TEST(Metrics, VolumeIsChartIndependent) {
  const QuadratureRule rule(40, 40);
  for (const auto& m : {fs_metric(), pnorm_metric(4), soft_max_metric(3)}) {
    EXPECT_NEAR(volume(m, rule, ChartChoice::natural), volume(m, rule, ChartChoice::swapped), 1e-12) << m.id();
  }
  EXPECT_NEAR(volume(fs_metric(), rule), 2.0, 1e-14);
}

TEST(Metrics, AnalyticC1MatchesFiniteDifference) {
  for (const auto& m : {fs_metric(), pnorm_metric(2), pnorm_metric(5), soft_max_metric(4)}) {
    const ConformalMetric stripped(m.id() + "-fd", Smoothness::smooth, [m](const ChartPoint& p) { return m.factor(p); });
    for (double x : {-0.6, 0.1, 0.5, 0.9}) {
      const ChartPoint p = at(x, 0.3);
      EXPECT_NEAR(chern_c1(stripped, p), chern_c1(m, p), 1e-6 * (1 + std::abs(chern_c1(m, p)))) << m.id();
    }
  }
}

TEST(Metrics, C1IntegratesToEulerCharacteristic) {
  const QuadratureRule rule(48, 48);
  for (const auto& m : {fs_metric(), pnorm_metric(2), pnorm_metric(3), soft_max_metric(2)})
    EXPECT_NEAR(c1_total(m, rule), 2.0, 1e-6) << m.id();
}

TEST(Metrics, FiniteDifferenceC1RefusesKink) {
  const ConformalMetric mx = max_metric();
  EXPECT_THROW(chern_c1(mx, at(0.0, 0.2)), UnsupportedPointError);
  EXPECT_NO_THROW(chern_c1(mx, at(0.5, 0.2)));
}

TEST(Metrics, PnormSupLogDistanceToMax) {
  const auto grid = equal_area_grid();
  ASSERT_EQ(grid.size(), 4096u);
  for (int p : {1, 2, 4, 8, 16})
    EXPECT_NEAR(sup_log_distance(pnorm_metric(p), max_metric(), grid), (2.0 / p) * std::log(2.0), 1e-8) << p;
}

TEST(Metrics, PnormOneIsFubiniStudyUpToScale) {
  for (double x : {-0.5, 0.2, 0.7}) {
    const ChartPoint p = at(x, 2.0);
    EXPECT_NEAR(pnorm_metric(1).factor(p), 0.5 * fs_metric().factor(p), 1e-15);
  }
}

TEST(Metrics, ScaledMetric) {
  const ConformalMetric m = scaled_metric(2.5, pnorm_metric(3));
  const ChartPoint p = at(0.3, 0.1);
  EXPECT_NEAR(m.factor(p), 2.5 * pnorm_metric(3).factor(p), 1e-15);
  EXPECT_NEAR(chern_c1(m, p), chern_c1(pnorm_metric(3), p), 1e-14);
  EXPECT_THROW(scaled_metric(-1, fs_metric()), DomainError);
}

TEST(Bump, EndpointsAndSymmetry) {
  EXPECT_EQ(bump(0.0), 0.0);
  EXPECT_EQ(bump(1.0), 1.0);
  for (double x : {0.1, 0.3, 0.45}) {
    EXPECT_NEAR(bump(x) + bump(1 - x), 1.0, 1e-15);
    EXPECT_NEAR(bump_derivative(x), bump_derivative(1 - x), 1e-12);
    const double h = 1e-6;
    EXPECT_NEAR(bump_derivative(x), (bump(x + h) - bump(x - h)) / (2 * h), 1e-7);
  }
  EXPECT_NEAR(bump_derivative_bound(), bump_derivative(0.5), 1e-6);
}

TEST(Families, InterpolationHitsMembersAtIntegers) {
  const MetricFamily fam = pnorm_family(6);
  const ChartPoint p = at(0.4, 0.0);
  for (int k : {2, 3, 5}) EXPECT_NEAR(interpolate(fam, k).factor(p), fam.member(k).factor(p), 1e-15);
  const double mid = interpolate(fam, 2.5).factor(p);
  EXPECT_NEAR(mid, 0.5 * (fam.member(2).factor(p) + fam.member(3).factor(p)), 1e-15);
  EXPECT_THROW(interpolate(fam, 0.5), DomainError);
  EXPECT_THROW(interpolate(fam, 5.5), DomainError);
}

TEST(Families, LogRateMatchesFiniteDifference) {
  const MetricFamily fam = pnorm_family(8);
  const ChartPoint p = at(0.3, 0.0);
  for (double u : {2.3, 4.7}) {
    const double h = 1e-6;
    const double fd = -(std::log(interpolate(fam, u + h).factor(p)) - std::log(interpolate(fam, u - h).factor(p))) / (2 * h);
    EXPECT_NEAR(interpolate_log_rate(fam, u, p), fd, 1e-7);
  }
}

TEST(Families, DeltaXWithinBound) {
  const MetricFamily fam = pnorm_family(10);
  const auto grid = equal_area_grid();
  for (double u : {1.5, 3.2, 7.9}) EXPECT_LE(delta_x(fam, u, grid), delta_x_bound(fam, u, grid) * (1 + 1e-12));
}

TEST(Families, ConstantFamilyHasZeroRate) {
  const MetricFamily fam = constant_family(fs_metric(), 5);
  EXPECT_EQ(delta_x(fam, 2.5, equal_area_grid()), 0.0);
}

TEST(MetricSpec, ParsesAndRejects) {
  EXPECT_EQ(parse_metric("fs").id(), "fs");
  EXPECT_EQ(parse_metric("pnorm:4").id(), "pnorm:4");
  EXPECT_EQ(parse_metric("soft:3").id(), "soft:3");
  EXPECT_NO_THROW(parse_metric("scaled:2:pnorm:3"));
  EXPECT_NO_THROW(parse_metric("interp:2.5:pnorm"));
  EXPECT_THROW(parse_metric("pnorm:x"), ValidationError);
  EXPECT_THROW(parse_metric("banana"), ValidationError);
  EXPECT_THROW(parse_family("nope", 4), ValidationError);
}

TEST(NodeDensities, RejectsNonpositiveFactor) {
  const ConformalMetric bad("bad", Smoothness::smooth, [](const ChartPoint&) { return -1.0; });
  EXPECT_THROW(node_densities(bad, QuadratureRule(4, 4)), InvalidMetricError);
}
