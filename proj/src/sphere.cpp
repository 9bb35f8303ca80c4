#include "hemiglue/sphere.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hemiglue/error.hpp"

namespace hemi {

namespace {

Jet norm_sq(const JetVec& y) {
  Jet r(y.front().dim(), y.front().order());
  for (const auto& c : y) r += c * c;
  return r;
}

}  // namespace

JetVec ambient_coordinates(const JetVec& y) {
  const Jet r2 = norm_sq(y);
  const Jet inv = 1.0 / (1.0 + r2);
  JetVec x;
  x.reserve(y.size() + 1);
  for (const auto& c : y) x.push_back(2.0 * c * inv);
  x.push_back((1.0 - r2) * inv);
  return x;
}

Jet height(const JetVec& y) {
  const Jet r2 = norm_sq(y);
  return (1.0 - r2) / (1.0 + r2);
}

Point to_ambient(std::span<const double> y) {
  double r2 = 0.0;
  for (double c : y) r2 += c * c;
  Point x;
  for (double c : y) x.push_back(2.0 * c / (1.0 + r2));
  x.push_back((1.0 - r2) / (1.0 + r2));
  return x;
}

Point to_chart(std::span<const double> x) {
  const double last = x.back();
  if (!(1.0 + last > 0.0)) throw Error("outside-domain", "south pole is not covered by the chart");
  Point y;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) y.push_back(x[i] / (1.0 + last));
  return y;
}

Jet round_factor(const JetVec& y) { return 4.0 / square(1.0 + norm_sq(y)); }

MetricField round_metric(int n, double scale) {
  MetricField g;
  g.dim = n;
  g.name = scale == 1.0 ? "round" : "scaled-round";
  g.eval = [n, scale](const JetVec& y) {
    const Jet w = scale * round_factor(y);
    JetMatrix m(n, y.front().dim(), w.order());
    for (int i = 0; i < n; ++i) m.set(i, i, w);
    return m;
  };
  return g;
}

MetricField euclidean_metric(int n) {
  MetricField g;
  g.dim = n;
  g.name = "euclidean";
  g.eval = [n](const JetVec& y) {
    JetMatrix m(n, y.front().dim(), y.front().order());
    for (int i = 0; i < n; ++i) m.set(i, i, Jet(y.front().dim(), y.front().order(), 1.0));
    return m;
  };
  return g;
}

MetricField hyperbolic_metric(int n) {
  MetricField g;
  g.dim = n;
  g.name = "hyperbolic-ball";
  g.domain = [](std::span<const double> p) {
    double r2 = 0.0;
    for (double c : p) r2 += c * c;
    return r2 < 1.0;
  };
  g.eval = [n](const JetVec& y) {
    const Jet w = 4.0 / square(1.0 - norm_sq(y));
    JetMatrix m(n, y.front().dim(), w.order());
    for (int i = 0; i < n; ++i) m.set(i, i, w);
    return m;
  };
  return g;
}

MetricField conformal_round(int n, ScalarField factor, int input_order, std::string name) {
  MetricField g;
  g.dim = n;
  g.input_order = input_order;
  g.name = std::move(name);
  g.eval = [n, factor](const JetVec& y) {
    const Jet w = factor(y) * round_factor(y);
    JetMatrix m(n, y.front().dim(), w.order());
    for (int i = 0; i < n; ++i) m.set(i, i, w);
    return m;
  };
  return g;
}

double ball_volume(int n) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

double sphere_area(int k) { return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1)); }

EquatorDerivatives equator_laplacian(double u, double dF, double d2F, int n) {
  EquatorDerivatives out;
  const double w = 1.0 - u * u;
  out.laplacian = w * d2F - (n - 1) * u * dF;
  out.grad_sq = w * dF * dF;
  return out;
}

Point equator_point(int n, double u) {
  Point y(static_cast<std::size_t>(n), 0.0);
  y[0] = std::sqrt(std::max(0.0, 1.0 - u * u));
  y[static_cast<std::size_t>(n - 1)] = u;
  return y;
}

std::vector<Point> random_sphere_points(int n, int count, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    Point p(static_cast<std::size_t>(n));
    double r2 = 0.0;
    for (auto& c : p) {
      c = normal(rng);
      r2 += c * c;
    }
    const double scale = radius / std::sqrt(r2);
    for (auto& c : p) c *= scale;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Point> random_ball_points(int n, int count, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto dirs = random_sphere_points(n, count, 1.0, seed ^ 0x9e3779b9u);
  for (auto& p : dirs) {
    const double r = radius * std::pow(unit(rng), 1.0 / n);
    for (auto& c : p) c *= r;
  }
  return dirs;
}

}  // namespace hemi
