#pragma once

#include <Eigen/Core>
#include <functional>

namespace atorsion {

/// Exponential integral E1(x) = int_1^inf e^{-xt}/t dt, x > 0.
/// Power series below 1, Lentz continued fraction from 1 on.
double expint_e1(double x);

struct IntegrationResult {
  double value = 0;
  double error = 0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]; interval bisection in a fixed
/// order so the result is reproducible. Stops at max_segments pieces.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     double abs_tol = 1e-13, double rel_tol = 1e-12,
                                     int max_segments = 400);

struct Extrapolation {
  double limit = 0;
  Eigen::VectorXd coefficients;  // of p^{-e_j}
};

/// Fits values(i) = A + sum_j c_j params(i)^{-exponents(j)} (least squares
/// when over-determined) and returns A.
Extrapolation richardson_extrapolate(const Eigen::Ref<const Eigen::VectorXd>& params,
                                     const Eigen::Ref<const Eigen::VectorXd>& values,
                                     const Eigen::Ref<const Eigen::VectorXd>& exponents);

}  // namespace atorsion
