#include "atorsion/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <vector>

#include "atorsion/errors.hpp"

namespace atorsion {

double expint_e1(double x) {
  if (!(x > 0)) throw DomainError("expint_e1: argument must be positive");
  constexpr double eps = 1e-17;
  if (x < 1.0) {
    double sum = 0, term = 1;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  if (x > 745.0) return 0.0;
  constexpr double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h * std::exp(-x);
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double value;
  double error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b, int& evals) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7], gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double fs = f(c - dx) + f(c + dx);
    kron += kWgk[j] * fs;
    if (j % 2 == 1) gauss += kWg[j / 2] * fs;
  }
  evals += 15;
  return {kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                     double rel_tol, int max_segments) {
  struct Piece {
    double a, b;
    Segment s;
  };
  int evals = 0;
  std::vector<Piece> pieces{{a, b, gk15(f, a, b, evals)}};
  const auto totals = [&pieces] {
    double v = 0, e = 0;
    for (const auto& p : pieces) {
      v += p.s.value;
      e += p.s.error;
    }
    return std::pair{v, e};
  };
  auto [value, error] = totals();
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && static_cast<int>(pieces.size()) < max_segments) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i].s.error > pieces[worst].s.error) worst = i;
    const Piece w = pieces[worst];
    const double m = 0.5 * (w.a + w.b);
    pieces[worst] = {w.a, m, gk15(f, w.a, m, evals)};
    pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(worst) + 1, {m, w.b, gk15(f, m, w.b, evals)});
    std::tie(value, error) = totals();
  }
  return {value, error, evals};
}

}  // namespace atorsion

#include <Eigen/QR>

namespace atorsion {

Extrapolation richardson_extrapolate(const Eigen::Ref<const Eigen::VectorXd>& params,
                                     const Eigen::Ref<const Eigen::VectorXd>& values,
                                     const Eigen::Ref<const Eigen::VectorXd>& exponents) {
  const Eigen::Index m = params.size(), k = exponents.size();
  if (values.size() != m || m < k + 1) throw DomainError("richardson_extrapolate: need more points than unknowns");
  Eigen::MatrixXd A(m, k + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    A(i, 0) = 1;
    for (Eigen::Index j = 0; j < k; ++j) A(i, j + 1) = std::pow(params(i), -exponents(j));
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(values);
  return {x(0), x.tail(k)};
}

}  // namespace atorsion
