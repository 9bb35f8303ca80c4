#include "hemiglue/functional.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hemiglue/error.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

namespace {

double gram_det(const Mat& g, const std::vector<Point>& tangent) {
  const int k = static_cast<int>(tangent.size());
  Eigen::MatrixXd gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < tangent[a].size(); ++i)
        for (std::size_t j = 0; j < tangent[b].size(); ++j) s += tangent[a][i] * g[i][j] * tangent[b][j];
      gram(a, b) = s;
    }
  return gram.determinant();
}

}  // namespace

double area_density(const Mat& g, std::span<const double> p) {
  const auto tangent = orthonormal_complement(p);
  const int n = static_cast<int>(p.size());
  double r2 = 0.0;
  for (double c : p) r2 += c * c;
  Mat round{};
  for (int i = 0; i < n; ++i) round[i][i] = 4.0 / ((1.0 + r2) * (1.0 + r2));
  const double dg = gram_det(g, tangent);
  if (!(dg > 0.0)) throw Error("metric-singular", "induced metric on the equator is degenerate");
  return std::sqrt(dg / gram_det(round, tangent));
}

double induced_area(const MetricField& g, const QuadratureRule& equator, Exec exec) {
  if (equator.target != QuadTarget::Equator) throw Error("quadrature-target", "induced area needs an equator rule");
  return equator.integrate([&](const Point& p) { return area_density(metric_value(g, p), p); }, exec);
}

FunctionalValue functional_F(const MetricField& g, const QuadratureRule& hemisphere, const QuadratureRule& equator,
                             Exec exec) {
  if (hemisphere.target != QuadTarget::Hemisphere) throw Error("quadrature-target", "volume term needs a hemisphere rule");
  FunctionalValue out;
  out.volume_term = hemisphere.integrate([&](const Point& p) { return scalar_curvature(g, p) * to_ambient(p).back(); }, exec);
  out.area_term = 2.0 * induced_area(g, equator, exec);
  out.value = out.volume_term + out.area_term;
  return out;
}

MomentReport moment_recursion_check(int n, int alpha_max, const QuadratureRule& equator, double tol) {
  if (alpha_max < 0 || alpha_max > 20 || alpha_max % 2 != 0)
    throw Error("unsupported-degree", "moment check needs an even alpha_max <= 20");
  MomentReport rep;
  const auto moment = [&](int a) {
    return equator.integrate([&](const Point& p) { return std::pow(p[static_cast<std::size_t>(n - 1)], a); }, Exec::Serial);
  };
  for (int a = 0; a <= alpha_max; a += 2) {
    MomentRow row;
    row.alpha = a;
    row.lhs = moment(a);
    row.rhs = (n + a) / (a + 1.0) * moment(a + 2);
    row.rel_error = std::abs(row.lhs - row.rhs) / std::abs(row.lhs);
    rep.worst = std::max(rep.worst, row.rel_error);
    rep.rows.push_back(row);
  }
  rep.pass = rep.worst < tol;
  return rep;
}

double pointwise_identity(const MetricField& h, std::span<const double> p) {
  const int n = h.dim;
  const MetricField round = round_metric(n);
  const auto hl = hessian_laplacian(ScalarField([](const JetVec& y) { return height(y); }), round, p);
  const Mat hv = metric_value(h, p);
  double r2 = 0.0;
  for (double c : p) r2 += c * c;
  const double inv = (1.0 + r2) * (1.0 + r2) / 4.0;
  double inner = 0.0, trace = 0.0;
  for (int i = 0; i < n; ++i) {
    trace += inv * hv[i][i];
    for (int j = 0; j < n; ++j) inner += inv * inv * hv[i][j] * hl.hessian[i][j];
  }
  const double f = to_ambient(p).back();
  return inner - trace * hl.laplacian - (n - 1) * trace * f;
}

}  // namespace hemi
