#include "hemiglue/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hemiglue/error.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

GaussRule gauss_jacobi(int m, double alpha, double beta) {
  if (m < 1) throw Error("unsupported-degree", "gauss rule needs at least one node");
  if (alpha <= -1.0 || beta <= -1.0) throw Error("unsupported-degree", "jacobi exponents must exceed -1");
  const double ab = alpha + beta;
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    const double s = 2.0 * k + ab;
    jm(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < m) {
      const double j = k + 1.0;
      const double t = 2.0 * j + ab;
      double b2;
      if (j == 1.0) {
        b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
      } else {
        b2 = 4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (t * t * (t + 1.0) * (t - 1.0));
      }
      jm(k, k + 1) = jm(k + 1, k) = std::sqrt(b2);
    }
  }
  const double mu0 =
      std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(m));
  r.w.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    r.x[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    r.w[k] = mu0 * v * v;
  }
  return r;
}

GaussRule gauss_legendre(int m) {
  // Newton on the three-term recurrence; more accurate than the eigenvalue route.
  GaussRule r;
  r.x.resize(static_cast<std::size_t>(m));
  r.w.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    r.x[static_cast<std::size_t>(m - 1 - i)] = x;
    r.w[static_cast<std::size_t>(m - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

GaussRule gauss_legendre(int m, double a, double b) {
  GaussRule r = gauss_legendre(m);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    r.x[k] = mid + half * r.x[k];
    r.w[k] *= half;
  }
  return r;
}

SphereRule sphere_rule(int k, int m) {
  SphereRule out;
  if (k == 1) {
    const int count = 2 * m;
    for (int j = 0; j < count; ++j) {
      const double th = 2.0 * std::numbers::pi * j / count;
      out.nodes.push_back({std::cos(th), std::sin(th)});
      out.weights.push_back(2.0 * std::numbers::pi / count);
    }
    return out;
  }
  const SphereRule inner = sphere_rule(k - 1, m);
  const double a = 0.5 * (k - 2);
  const GaussRule polar = a == 0.0 ? gauss_legendre(m) : gauss_jacobi(m, a, a);
  for (std::size_t p = 0; p < polar.x.size(); ++p) {
    const double w = polar.x[p];
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    for (std::size_t q = 0; q < inner.nodes.size(); ++q) {
      Point node;
      for (double c : inner.nodes[q]) node.push_back(s * c);
      node.push_back(w);
      out.nodes.push_back(std::move(node));
      out.weights.push_back(polar.w[p] * inner.weights[q]);
    }
  }
  return out;
}

namespace {

void require_dimension(int n) {
  if (n < 3 || n > kMaxDim) throw Error("unsupported-dimension", "quadrature needs 3 <= n <= 5, got " + std::to_string(n));
}

GaussRule polar_rule(int n, int m) {
  const double a = 0.5 * (n - 3);
  return a == 0.0 ? gauss_legendre(m) : gauss_jacobi(m, a, a);
}

}  // namespace

QuadratureRule hemisphere_rule(int n, int radial, int angular, bool symmetric) {
  require_dimension(n);
  QuadratureRule rule;
  rule.target = QuadTarget::Hemisphere;
  rule.n = n;
  rule.degree = 2 * angular - 1;
  rule.symmetric = symmetric;
  const GaussRule rad = gauss_legendre(radial, 0.0, 1.0);
  std::vector<Point> dirs;
  std::vector<double> dw;
  if (symmetric) {
    const GaussRule pol = polar_rule(n, angular);
    const double shell = sphere_area(n - 2);
    for (std::size_t k = 0; k < pol.x.size(); ++k) {
      Point d(static_cast<std::size_t>(n), 0.0);
      d[0] = std::sqrt(std::max(0.0, 1.0 - pol.x[k] * pol.x[k]));
      d[static_cast<std::size_t>(n - 1)] = pol.x[k];
      dirs.push_back(std::move(d));
      dw.push_back(shell * pol.w[k]);
    }
  } else {
    SphereRule s = sphere_rule(n - 1, angular);
    dirs = std::move(s.nodes);
    dw = std::move(s.weights);
  }
  for (std::size_t i = 0; i < rad.x.size(); ++i) {
    const double r = rad.x[i];
    const double jac = std::pow(2.0 / (1.0 + r * r), n) * std::pow(r, n - 1);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      Point p = dirs[k];
      for (double& c : p) c *= r;
      rule.nodes.push_back(std::move(p));
      rule.weights.push_back(rad.w[i] * jac * dw[k]);
    }
  }
  return rule;
}

QuadratureRule equator_rule(int n, int points, bool symmetric) {
  require_dimension(n);
  QuadratureRule rule;
  rule.target = QuadTarget::Equator;
  rule.n = n;
  rule.degree = 2 * points - 1;
  rule.symmetric = symmetric;
  if (symmetric) {
    const GaussRule pol = polar_rule(n, points);
    const double shell = sphere_area(n - 2);
    for (std::size_t k = 0; k < pol.x.size(); ++k) {
      rule.nodes.push_back(equator_point(n, pol.x[k]));
      rule.weights.push_back(shell * pol.w[k]);
    }
  } else {
    SphereRule s = sphere_rule(n - 1, points);
    rule.nodes = std::move(s.nodes);
    rule.weights = std::move(s.weights);
  }
  return rule;
}

QuadratureRule build_quadrature(int n, QuadTarget target, int degree, bool symmetric) {
  if (degree < 0 || degree > 60) throw Error("unsupported-degree", "quadrature degree must be in [0, 60], got " + std::to_string(degree));
  const int m = degree / 2 + 1;
  if (target == QuadTarget::Equator) return equator_rule(n, m, symmetric);
  return hemisphere_rule(n, std::max(48, degree + 8), m, symmetric);
}

double QuadratureRule::integrate(const std::function<double(const Point&)>& fn, Exec exec) const {
  return index_sum(nodes.size(), [&](std::size_t i) { return weights[i] * fn(nodes[i]); }, exec);
}

double QuadratureRule::sum(std::span<const double> values) const {
  if (values.size() != weights.size()) throw Error("quadrature-size", "value count does not match the rule");
  std::vector<double> terms(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) terms[i] = weights[i] * values[i];
  return pairwise_sum(terms);
}

void write_csv(const QuadratureRule& rule, std::ostream& out) {
  const auto old = out.precision(17);
  for (int i = 0; i < rule.n; ++i) out << 'y' << (i + 1) << ',';
  out << "weight\n";
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    for (double c : rule.nodes[k]) out << c << ',';
    out << rule.weights[k] << '\n';
  }
  out.precision(old);
}

}  // namespace hemi
