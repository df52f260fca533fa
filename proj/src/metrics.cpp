#include "atorsion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "atorsion/errors.hpp"

namespace atorsion {

ChartPoint ChartPoint::other() const {
  if (z == std::complex<double>(0.0, 0.0)) throw DomainError("chart origin has no image in the other chart");
  return {1 - chart, 1.0 / z};
}

ChartPoint chart_point_from_sphere(double x, double phi) {
  if (x >= 0) {
    const double r = std::sqrt((1 - x) / (1 + x));
    return {0, std::polar(r, phi)};
  }
  const double r = std::sqrt((1 + x) / (1 - x));
  return {1, std::polar(r, -phi)};
}

std::string to_string(Smoothness s) {
  switch (s) {
    case Smoothness::smooth:
      return "smooth";
    case Smoothness::continuous:
      return "continuous";
    case Smoothness::singular_integrable:
      return "singular-integrable";
  }
  return "unknown";
}

ConformalMetric::ConformalMetric(std::string id, Smoothness smoothness, PointFn factor,
                                 std::optional<PointFn> analytic_c1, PointFn kink_distance)
    : id_(std::move(id)),
      smoothness_(smoothness),
      factor_(std::move(factor)),
      analytic_c1_(std::move(analytic_c1)),
      kink_distance_(std::move(kink_distance)) {}

double ConformalMetric::density(const ChartPoint& p) const {
  const double q = 1 + p.abs2();
  return factor_(p) * q * q;
}

double ConformalMetric::analytic_c1(const ChartPoint& p) const {
  if (!analytic_c1_) throw UnsupportedMetricError("metric " + id_ + " has no analytic c1 density");
  return (*analytic_c1_)(p);
}

double ConformalMetric::kink_distance(const ChartPoint& p) const {
  if (!kink_distance_) return std::numeric_limits<double>::infinity();
  return kink_distance_(p);
}

ConformalMetric ConformalMetric::scaled(double t) const { return scaled_metric(t, *this); }

namespace {

double unit_circle_distance(const ChartPoint& p) { return std::abs(std::abs(p.z) - 1.0); }

}  // namespace

// All built-in metrics are radial and invariant under z -> 1/z, so the same
// formula in s = |coordinate|^2 serves both charts.

ConformalMetric fs_metric() {
  return ConformalMetric(
      "fs", Smoothness::smooth,
      [](const ChartPoint& p) {
        const double q = 1 + p.abs2();
        return 2.0 / (q * q);
      },
      [](const ChartPoint& p) {
        const double q = 1 + p.abs2();
        return 2.0 / (q * q);
      });
}

ConformalMetric max_metric() {
  return ConformalMetric(
      "max", Smoothness::singular_integrable,
      [](const ChartPoint& p) {
        const double m = std::max(1.0, p.abs2());
        return 1.0 / (m * m);
      },
      std::nullopt, unit_circle_distance);
}

ConformalMetric pnorm_metric(int p) {
  if (p < 1) throw DomainError("pnorm exponent must be >= 1");
  const double pd = p;
  auto factor = [pd](const ChartPoint& c) {
    const double s = c.abs2();
    if (s <= 1) return std::exp(-(2.0 / pd) * std::log1p(std::pow(s, pd)));
    return std::exp(-2.0 * std::log(s) - (2.0 / pd) * std::log1p(std::pow(s, -pd)));
  };
  auto c1 = [pd](const ChartPoint& c) {
    const double s = c.abs2();
    if (s == 0) return pd == 1 ? 2.0 : 0.0;
    if (s <= 1) {
      const double sp = std::pow(s, pd);
      return 2 * pd * sp / s / ((1 + sp) * (1 + sp));
    }
    const double sm = std::pow(s, -pd);
    return 2 * pd * sm / s / ((1 + sm) * (1 + sm));
  };
  return ConformalMetric("pnorm:" + std::to_string(p), Smoothness::smooth, factor, c1);
}

ConformalMetric soft_max_metric(int k) {
  if (k < 1) throw DomainError("soft-max parameter must be >= 1");
  const double e2 = 1.0 / (static_cast<double>(k) * k);
  auto g = [e2](double s) { return 0.5 * (1 + s + std::sqrt((1 - s) * (1 - s) + e2 * s)); };
  auto factor = [g](const ChartPoint& c) {
    const double v = g(c.abs2());
    return 1.0 / (v * v);
  };
  auto c1 = [e2](const ChartPoint& c) {
    const double s = c.abs2();
    const double r = std::sqrt((1 - s) * (1 - s) + e2 * s);
    const double gv = 0.5 * (1 + s + r);
    const double r1 = (s - 1 + 0.5 * e2) / r;
    const double r2 = e2 * (1 - 0.25 * e2) / (r * r * r);
    const double g1 = 0.5 * (1 + r1), g2 = 0.5 * r2;
    const double q = g1 / gv;
    return 2 * ((g1 + s * g2) / gv - s * q * q);
  };
  return ConformalMetric("soft:" + std::to_string(k), Smoothness::smooth, factor, c1);
}

ConformalMetric scaled_metric(double t, const ConformalMetric& inner) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("metric scale must be positive");
  std::ostringstream id;
  id.precision(17);
  id << "scaled:" << t << ":" << inner.id();
  std::optional<ConformalMetric::PointFn> c1;
  if (inner.has_analytic_c1()) c1 = [inner](const ChartPoint& p) { return inner.analytic_c1(p); };
  return ConformalMetric(
      id.str(), inner.smoothness(), [inner, t](const ChartPoint& p) { return t * inner.factor(p); }, c1,
      [inner](const ChartPoint& p) { return inner.kink_distance(p); });
}

namespace {

double bump_f(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double bump(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double a = bump_f(x), b = bump_f(1 - x);
  return a / (a + b);
}

double bump_derivative(double x) {
  if (x <= 0 || x >= 1) return 0;
  const double a = bump_f(x), b = bump_f(1 - x);
  const double da = a / (x * x), db = b / ((1 - x) * (1 - x));
  const double d = a + b;
  return (da * b + a * db) / (d * d);
}

double bump_derivative_bound() {
  static const double bound = [] {
    double m = 0;
    for (int i = 1; i < 4000; ++i) m = std::max(m, bump_derivative(i / 4000.0));
    return m;
  }();
  return bound;
}

MetricFamily::MetricFamily(std::string id, std::vector<ConformalMetric> members,
                           std::optional<ConformalMetric> limit)
    : id_(std::move(id)), members_(std::move(members)), limit_(std::move(limit)) {
  if (members_.empty()) throw DomainError("metric family needs at least one member");
}

MetricFamily pnorm_family(int count) {
  std::vector<ConformalMetric> m;
  for (int n = 0; n < count; ++n) m.push_back(pnorm_metric(std::max(n, 1)));
  return MetricFamily("pnorm", std::move(m), max_metric());
}

MetricFamily soft_family(int count) {
  std::vector<ConformalMetric> m;
  for (int n = 0; n < count; ++n) m.push_back(soft_max_metric(std::max(n, 1)));
  return MetricFamily("soft", std::move(m), max_metric());
}

MetricFamily constant_family(const ConformalMetric& metric, int count) {
  return MetricFamily("const:" + metric.id(), std::vector<ConformalMetric>(std::max(count, 1), metric),
                      metric);
}

namespace {

struct Bracket {
  std::size_t k;  // upper member index
  double x;       // local coordinate in [0, 1]
};

Bracket bracket(const MetricFamily& family, double u) {
  if (!(u >= 1) || !std::isfinite(u)) throw DomainError("interpolation parameter must be >= 1");
  const double k = std::ceil(u);
  const auto ki = static_cast<std::size_t>(k);
  if (ki >= family.size())
    throw DomainError("family " + family.id() + " has " + std::to_string(family.size()) +
                      " members; interpolation at u = " + std::to_string(u) + " needs " + std::to_string(ki + 1));
  return {ki, u - (k - 1)};
}

std::string format_param(double u) {
  std::ostringstream os;
  os.precision(17);
  os << u;
  return os.str();
}

}  // namespace

ConformalMetric interpolate(const MetricFamily& family, double u) {
  const Bracket b = bracket(family, u);
  const ConformalMetric lo = family.member(b.k - 1), hi = family.member(b.k);
  const double r = bump(b.x);
  const std::string id = "interp:" + format_param(u) + ":" + family.id();
  auto kink = [lo, hi](const ChartPoint& p) { return std::min(lo.kink_distance(p), hi.kink_distance(p)); };
  if (r == 1) return hi;
  const Smoothness sm = std::max(lo.smoothness(), hi.smoothness());
  return ConformalMetric(
      id, sm, [lo, hi, r](const ChartPoint& p) { return (1 - r) * lo.factor(p) + r * hi.factor(p); }, std::nullopt,
      kink);
}

double interpolate_log_rate(const MetricFamily& family, double u, const ChartPoint& p) {
  const Bracket b = bracket(family, u);
  const double dr = bump_derivative(b.x);
  if (dr == 0) return 0;
  const double lo = family.member(b.k - 1).factor(p), hi = family.member(b.k).factor(p);
  const double r = bump(b.x);
  return dr * (lo - hi) / ((1 - r) * lo + r * hi);
}

std::vector<ChartPoint> equal_area_grid() {
  std::vector<ChartPoint> g;
  g.reserve(4096);
  for (int k = 0; k < 64; ++k) {
    const double x = -1.0 + (k + 1) / 32.0;
    for (int j = 0; j < 64; ++j) g.push_back(chart_point_from_sphere(x, 2 * std::numbers::pi * j / 64));
  }
  return g;
}

double delta_x(const MetricFamily& family, double u, std::span<const ChartPoint> grid) {
  if (grid.empty()) throw DomainError("delta_x: empty grid");
  double m = 0;
  for (const auto& p : grid) m = std::max(m, std::abs(interpolate_log_rate(family, u, p)));
  return m;
}

double delta_x_bound(const MetricFamily& family, double u, std::span<const ChartPoint> grid) {
  if (grid.empty()) throw DomainError("delta_x_bound: empty grid");
  const Bracket b = bracket(family, u);
  const double r = bump(b.x);
  double rel = 0, ratio = 0;
  for (const auto& p : grid) {
    const double lo = family.member(b.k - 1).factor(p), hi = family.member(b.k).factor(p);
    rel = std::max(rel, std::abs((lo - hi) / hi));
    ratio = std::max(ratio, hi / ((1 - r) * lo + r * hi));
  }
  return bump_derivative_bound() * ratio * rel;
}

double sup_log_distance(const ConformalMetric& a, const ConformalMetric& b, std::span<const ChartPoint> grid) {
  double m = 0;
  for (const auto& p : grid) m = std::max(m, std::abs(std::log(a.factor(p) / b.factor(p))));
  return m;
}

double chern_c1(const ConformalMetric& m, const ChartPoint& p) {
  if (m.has_analytic_c1()) return m.analytic_c1(p);
  const double h = std::max(1e-4, 1e-3 * (1 + std::abs(p.z)));
  if (m.smoothness() != Smoothness::smooth && m.kink_distance(p) <= 3 * h)
    throw UnsupportedPointError("c1 of " + m.id() + " requested on its kink set");
  auto f = [&](double dx, double dy) {
    return std::log(m.factor({p.chart, p.z + std::complex<double>(dx, dy)}));
  };
  const double f0 = f(0, 0);
  const double dxx = (-f(2 * h, 0) + 16 * f(h, 0) - 30 * f0 + 16 * f(-h, 0) - f(-2 * h, 0)) / (12 * h * h);
  const double dyy = (-f(0, 2 * h) + 16 * f(0, h) - 30 * f0 + 16 * f(0, -h) - f(0, -2 * h)) / (12 * h * h);
  return -0.25 * (dxx + dyy);
}

double chern_c1_density(const ConformalMetric& m, const ChartPoint& p) {
  const double q = 1 + p.abs2();
  return chern_c1(m, p) * q * q;
}

ChartPoint rule_point(const QuadratureRule& rule, Eigen::Index node) {
  const auto ring = static_cast<int>(node / rule.n_phi());
  const auto j = static_cast<int>(node % rule.n_phi());
  return chart_point_from_sphere(rule.cos_theta()(ring), rule.phi()(j));
}

Eigen::VectorXd node_densities(const ConformalMetric& m, const QuadratureRule& rule) {
  Eigen::VectorXd d(rule.size());
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    const double v = m.density(rule_point(rule, k));
    if (!(v > 0) || !std::isfinite(v))
      throw InvalidMetricError("metric " + m.id() + " has nonpositive conformal factor at quadrature node " +
                               std::to_string(k));
    d(k) = v;
  }
  return d;
}

double volume(const ConformalMetric& m, const QuadratureRule& rule, ChartChoice choice) {
  if (choice == ChartChoice::natural) return rule.integrate(node_densities(m, rule));
  Eigen::VectorXd d(rule.size());
  for (Eigen::Index k = 0; k < rule.size(); ++k) d(k) = m.density(rule_point(rule, k).other());
  return rule.integrate(d);
}

}  // namespace atorsion
