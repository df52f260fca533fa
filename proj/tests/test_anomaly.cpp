#include <gtest/gtest.h>

#include <cmath>

#include "atorsion/anomaly.hpp"
#include "atorsion/errors.hpp"

using namespace atorsion;

namespace {

const SpectralBasis& basis32() {
  static const SpectralBasis b = build_basis(32);
  return b;
}

}  // namespace

TEST(BottChern, VanishesOnDiagonalAndIsAntisymmetric) {
  const QuadratureRule rule(48, 48);
  const ConformalMetric p = pnorm_metric(3), q = soft_max_metric(2);
  EXPECT_NEAR(bott_chern_integral(p, p, rule), 0.0, 1e-15);
  EXPECT_NEAR(bott_chern_integral(p, q, rule), -bott_chern_integral(q, p, rule), 1e-15);
}

TEST(BottChern, ConstantRescaling) {
  // log ratio constant: -(1/12) log t (2 + 2)
  const QuadratureRule rule(40, 40);
  for (double t : {0.5, 3.0})
    EXPECT_NEAR(bott_chern_integral(scaled_metric(t, pnorm_metric(2)), pnorm_metric(2), rule), -std::log(t) / 3, 1e-9);
}

TEST(BottChern, BoundedByConstantTimesSupLogDistance) {
  const QuadratureRule rule(48, 48);
  const auto grid = equal_area_grid();
  for (int p : {2, 4, 8}) {
    const ConformalMetric a = pnorm_metric(p), b = fs_metric();
    EXPECT_LE(std::abs(bott_chern_integral(a, b, rule)),
              bott_chern_constant(a, b, rule) * sup_log_distance(a, b, grid) * (1 + 1e-9));
  }
}

TEST(BottChern, SingularMetricWithoutDensityRejected) {
  EXPECT_THROW(bott_chern_integral(max_metric(), fs_metric(), QuadratureRule(16, 16)), UnsupportedMetricError);
}

TEST(BottChern, CheckedErrorIsSmallForSmoothPair) {
  const AnomalyValue v = bott_chern_checked(pnorm_metric(2), fs_metric(), basis32().rule());
  EXPECT_LT(v.error, 1e-8);
}

TEST(Quillen, SignCalibrationMatchesFrozenConstant) {
  const ConformalMetric fs = fs_metric(), p2 = pnorm_metric(2);
  const MetricAnalysis a = analyze_metric(basis32(), p2), b = analyze_metric(basis32(), fs);
  EXPECT_EQ(calibrate_quillen_sign(a, b, p2, fs, basis32().rule()), kQuillenSign);
}

TEST(Quillen, RescalingMatchesAnomaly) {
  const SpectralBasis b = build_basis(20);
  const ConformalMetric base = pnorm_metric(2);
  const MetricAnalysis a0 = analyze_metric(b, base);
  for (double t : {0.5, 4.0}) {
    const ConformalMetric sc = scaled_metric(t, base);
    const TwoRouteComparison r = compare_routes(analyze_metric(b, sc), a0, sc, base, b.rule());
    EXPECT_NEAR(r.anomaly, std::log(t) / 3, 1e-9);
    EXPECT_LE(r.discrepancy(), std::max(1e-3, 3 * r.budget)) << t;
  }
}

TEST(Quillen, TwoRoutesAgreeForPnorm2) {
  const ConformalMetric fs = fs_metric(), p2 = pnorm_metric(2);
  const TwoRouteComparison r =
      compare_routes(analyze_metric(basis32(), p2), analyze_metric(basis32(), fs), p2, fs, basis32().rule());
  EXPECT_LE(r.discrepancy(), std::max(1e-3, 3 * r.budget));
}

TEST(Quillen, RejectsInvalidSign) {
  const MetricAnalysis a = analyze_metric(build_basis(8), fs_metric());
  EXPECT_THROW(quillen_log(fs_metric(), QuadratureRule(18, 18), a.torsion, 0), DomainError);
}
