#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atorsion/quadrature.hpp"

namespace atorsion {

/// Point of P^1 in one of the two standard charts: chart 0 carries
/// z = x0/x1, chart 1 carries w = x1/x0 = 1/z.
struct ChartPoint {
  int chart = 0;
  std::complex<double> z;

  /// Same point in the other chart; undefined at z = 0.
  ChartPoint other() const;
  double abs2() const { return std::norm(z); }
};

/// Chart point of the unit-sphere point with cos(theta) = x and azimuth phi.
/// The closed northern hemisphere (x >= 0) uses chart 0, so |coordinate| <= 1.
ChartPoint chart_point_from_sphere(double x, double phi);

enum class Smoothness { smooth, continuous, singular_integrable };

std::string to_string(Smoothness s);

/// Hermitian metric on TP^1 given by its conformal factor
/// lambda = h(d/dz, d/dz) in each chart.
class ConformalMetric {
 public:
  using PointFn = std::function<double(const ChartPoint&)>;

  ConformalMetric(std::string id, Smoothness smoothness, PointFn factor,
                  std::optional<PointFn> analytic_c1 = std::nullopt, PointFn kink_distance = {});

  const std::string& id() const { return id_; }
  Smoothness smoothness() const { return smoothness_; }

  double factor(const ChartPoint& p) const { return factor_(p); }
  /// Volume density relative to the normalized round measure dA/(4 pi):
  /// lambda (1 + |z|^2)^2, independent of the chart.
  double density(const ChartPoint& p) const;

  bool has_analytic_c1() const { return analytic_c1_.has_value(); }
  /// Density of c1(TX, h) against (i/2pi) dz ^ dzbar.
  double analytic_c1(const ChartPoint& p) const;

  /// Coordinate distance to the non-smooth locus (infinity if there is none).
  double kink_distance(const ChartPoint& p) const;

  ConformalMetric scaled(double t) const;

 private:
  std::string id_;
  Smoothness smoothness_;
  PointFn factor_;
  std::optional<PointFn> analytic_c1_;
  PointFn kink_distance_;
};

ConformalMetric fs_metric();
ConformalMetric max_metric();
ConformalMetric pnorm_metric(int p);
/// Mollified max: lambda = g(s)^-2 with g(s) = (1 + s + sqrt((1-s)^2 + s/k^2)) / 2.
ConformalMetric soft_max_metric(int k);
ConformalMetric scaled_metric(double t, const ConformalMetric& inner);

/// Smooth step rho(x) = f(x)/(f(x) + f(1-x)), f(x) = exp(-1/x).
double bump(double x);
double bump_derivative(double x);
/// sup of |bump'| on [0, 1].
double bump_derivative_bound();

class MetricFamily {
 public:
  MetricFamily(std::string id, std::vector<ConformalMetric> members,
               std::optional<ConformalMetric> limit = std::nullopt);

  const std::string& id() const { return id_; }
  std::size_t size() const { return members_.size(); }
  const ConformalMetric& member(std::size_t n) const { return members_.at(n); }
  const std::optional<ConformalMetric>& limit() const { return limit_; }

 private:
  std::string id_;
  std::vector<ConformalMetric> members_;
  std::optional<ConformalMetric> limit_;
};

/// members[n] = pnorm(max(n, 1)), n < count; limit = max metric.
MetricFamily pnorm_family(int count);
/// members[n] = soft_max(max(n, 1)); limit = max metric.
MetricFamily soft_family(int count);
MetricFamily constant_family(const ConformalMetric& m, int count);

/// H(u) = (1 - rho(x)) h_{k-1} + rho(x) h_k with x = u - (k-1), u in [k-1, k].
ConformalMetric interpolate(const MetricFamily& family, double u);

/// d/du log H(u)^{-1} at a point, from the closed form.
double interpolate_log_rate(const MetricFamily& family, double u, const ChartPoint& p);

/// 4096-point equal-area grid (64 latitude rings uniform in cos(theta),
/// including the equator and the north pole, 64 longitudes each).
std::vector<ChartPoint> equal_area_grid();

double delta_x(const MetricFamily& family, double u, std::span<const ChartPoint> grid);
/// c * sup |(h_[u] - h_[u]+1) / h_[u]+1| with c = sup|bump'| * sup(h_[u]+1 / H(u)).
double delta_x_bound(const MetricFamily& family, double u, std::span<const ChartPoint> grid);

/// max over grid of |log(lambda_a / lambda_b)|.
double sup_log_distance(const ConformalMetric& a, const ConformalMetric& b,
                        std::span<const ChartPoint> grid);

/// Density of c1 against (i/2pi) dz ^ dzbar: analytic when available, else a
/// fourth-order finite-difference Laplacian of -log(lambda) / 4.
double chern_c1(const ConformalMetric& m, const ChartPoint& p);

/// Chart-independent c1 density relative to the normalized round measure.
double chern_c1_density(const ConformalMetric& m, const ChartPoint& p);

/// Chart point of a quadrature node.
ChartPoint rule_point(const QuadratureRule& rule, Eigen::Index node);

enum class ChartChoice { natural, swapped };

/// int omega = int lambda (i/2pi) dz ^ dzbar. `swapped` evaluates every node
/// in the opposite chart.
double volume(const ConformalMetric& m, const QuadratureRule& rule,
              ChartChoice choice = ChartChoice::natural);

/// Volume densities at every node; throws InvalidMetricError on a
/// nonpositive or non-finite value.
Eigen::VectorXd node_densities(const ConformalMetric& m, const QuadratureRule& rule);

/// Parses "fs", "max", "pnorm:<p>", "soft:<k>", "scaled:<t>:<inner>",
/// "interp:<u>:<family-spec>".
ConformalMetric parse_metric(const std::string& spec);

/// Parses "pnorm", "soft" or "const:<metric-spec>" with the given member count.
MetricFamily parse_family(const std::string& spec, int count);

}  // namespace atorsion
