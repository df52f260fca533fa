#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "atorsion/discretization.hpp"
#include "atorsion/errors.hpp"
#include "atorsion/heat_zeta.hpp"
#include "atorsion/operator_theory.hpp"

using namespace atorsion;

namespace {

Spectrum finite(std::initializer_list<double> values, int kernel) {
  Spectrum s;
  s.eigenvalues.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s.eigenvalues(i++) = v;
  s.kernel_dim = kernel;
  return s;
}

// FS at L = 32 is shared by several tests
const Spectrum& fs32() {
  static const Spectrum s = [] {
    Spectrum r = generalized_eigs(assemble(build_basis(32), fs_metric()), EigOptions{.vectors = false});
    r.basis_L = 32;
    return r;
  }();
  return s;
}

constexpr double kFsZetaPrime = -1.6237826951751004;

}  // namespace

TEST(Theta, SmallSpectrumOracle) {
  EXPECT_NEAR(theta(finite({0, 1, 2}, 1), 1.0), 0.50321472440, 1e-10);
}

TEST(Theta, DecreasingAndLogConvex) {
  const Spectrum& s = fs32();
  const Eigen::VectorXd t = geometric_grid(0.05, 5, 40);
  const HeatTraceSamples h = sample_theta(s, t);
  for (Eigen::Index i = 1; i < t.size(); ++i) EXPECT_LT(h.values(i), h.values(i - 1));
  for (Eigen::Index i = 1; i + 1 < t.size(); ++i) {
    // log-convexity on a geometric grid in t (slope comparison)
    const double a = (std::log(h.values(i)) - std::log(h.values(i - 1))) / (t(i) - t(i - 1));
    const double b = (std::log(h.values(i + 1)) - std::log(h.values(i))) / (t(i + 1) - t(i));
    EXPECT_LE(a, b + 1e-12);
  }
}

TEST(Zeta, SmallSpectrumOracle) {
  EXPECT_NEAR(zeta(finite({0, 1, 4}, 1), 2.0), 1.0625, 1e-15);
  EXPECT_THROW(zeta(finite({0, 1}, 1), 1.0), DomainError);
}

TEST(ZetaPrime, FiniteSpectrumGivesMinusLogDeterminant) {
  const Spectrum s = finite({1, 2, 3}, 0);
  // exact Taylor coefficients of theta: sum (-t)^k p_k / k!
  AsymptoticFit fit;
  fit.coefficients.resize(7);
  fit.coefficients << 0, 3, -6, 7, -6, 98.0 / 24, -276.0 / 120;
  fit.t_lo = 1e-3;
  fit.t_hi = 1e-2;
  EXPECT_NEAR(zeta_prime_zero(s, fit), -std::log(6.0), 1e-12);
}

TEST(FitWindow, ExplicitWindowBelowTruncationBoundRejected) {
  FitOptions o;
  o.t_lo = 1e-4;
  try {
    fit_window(fs32(), o);
    FAIL() << "expected FitWindowError";
  } catch (const FitWindowError& e) {
    EXPECT_NE(std::string(e.what()).find("t_lo"), std::string::npos) << e.what();
  }
}

TEST(Asymptotics, FubiniStudyWeylCoefficients) {
  const AsymptoticFit fit = fit_asymptotics(fs32());
  EXPECT_NEAR(fit.b_minus1(), 2.0, 1e-3);     // volume
  EXPECT_NEAR(fit.b_0(), -2.0 / 3.0, 2e-3);   // chi/6 - kernel
}

TEST(Torsion, FubiniStudyMatchesClosedForm) {
  const TorsionResult r = analyze_torsion(fs32());
  EXPECT_LT(r.budget.total(), 1e-2);
  EXPECT_NEAR(r.zeta_prime0, kFsZetaPrime, r.budget.total());
}

TEST(Torsion, ScalingLaw) {
  const SpectralBasis b = build_basis(16);
  const Spectrum s = generalized_eigs(assemble(b, pnorm_metric(3)), EigOptions{.vectors = false});
  const TorsionResult base = analyze_torsion(s);
  for (double t0 : {0.5, 2.0, 10.0}) {
    const Spectrum st = generalized_eigs(assemble(b, scaled_metric(t0, pnorm_metric(3))), EigOptions{.vectors = false});
    const Eigen::VectorXd ratio = st.nonzero().cwiseProduct(s.nonzero().cwiseInverse());
    EXPECT_LT((ratio.array() * t0 - 1).abs().maxCoeff(), 1e-10) << t0;
    const TorsionResult sc = analyze_torsion(st);
    EXPECT_NEAR(sc.fit.b_minus1() / base.fit.b_minus1(), t0, 1e-6 * t0);
    EXPECT_NEAR(sc.zeta_prime0, base.zeta0 * std::log(t0) + base.zeta_prime0, sc.budget.total() + base.budget.total());
  }
}

TEST(Mellin, AgreesWithEigenvalueSumForFubiniStudy) {
  const Spectrum& s = fs32();
  const AsymptoticFit fit = fit_asymptotics(s);
  for (double sv : {1.5, 2.0, 3.0}) {
    const ZetaTail direct = zeta_with_tail(s, fit, sv);
    const MellinResult m = zeta_mellin(s, fit, sv);
    const double total = direct.direct + direct.tail;
    EXPECT_LE(std::abs(m.value - total), 1e-4 * total) << sv;
    EXPECT_LE(std::abs(m.value - total), m.error + direct.uncertainty) << sv;
  }
}

TEST(Duhamel, ResidualSmallAndShrinksUnderRefinement) {
  const SpectralBasis b = build_basis(8);
  const MetricFamily fam = pnorm_family(5);
  auto residual = [&](double h, int nodes) {
    return duhamel_residual(assemble(b, interpolate(fam, 2.5 - h)), assemble(b, interpolate(fam, 2.5)),
                            assemble(b, interpolate(fam, 2.5 + h)), h, 0.5, nodes);
  };
  const DuhamelResult r1 = residual(1e-3, 32);
  const DuhamelResult r2 = residual(5e-4, 64);
  EXPECT_LT(r1.relative, 1e-4);
  EXPECT_LT(r2.residual, 0.5 * r1.residual);
}

TEST(Duhamel, ConstantFamilyVanishes) {
  const SpectralBasis b = build_basis(6);
  const OperatorPair p = assemble(b, pnorm_metric(2));
  EXPECT_LT(duhamel_residual(p, p, p, 1e-3, 0.5, 16).residual, 1e-12);
}

TEST(HeatTraceNorm, EqualsThetaForPositiveOperator) {
  const SpectralBasis b = build_basis(10);
  const OperatorPair pair = assemble(b, pnorm_metric(3));
  const Spectrum s = generalized_eigs(pair);
  for (double t : {0.1, 1.0}) EXPECT_NEAR(heat_trace_norm(pair, s, t), theta(s, t), 1e-10 * theta(s, t));
}

TEST(ResolventTrace, BoundsHeatTrace) {
  const Spectrum& s = fs32();
  double tr = 0;
  for (Eigen::Index k = s.kernel_dim; k < s.size(); ++k) tr += 1 / std::pow(1 + s.eigenvalues(k), 2);
  for (double t : {0.5, 1.0, 3.0}) {
    const double a = std::max(2 / t - 1, 0.0);  // argmax of exp(-ta)(1+a)^2
    const double ct = std::exp(-t * a) * (1 + a) * (1 + a);
    EXPECT_GE(tr, theta(s, t) / ct);
  }
}
