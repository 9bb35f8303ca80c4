#include <cmath>

#include "doctest.h"
#include "hemiglue/error.hpp"
#include "hemiglue/pipeline.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

namespace {

double radius_at_height(double f) { return std::sqrt((1.0 - f) / (1.0 + f)); }

Point chart_point(int n, double f, int axis = 0) {
  Point p(n, 0.0);
  p[axis] = radius_at_height(f);
  return p;
}

double max_entry_diff(const Mat& a, const Mat& b, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace

TEST_CASE("flattened conformal factor") {
  const double e1 = 1.0 - std::exp(-1.0);
  CHECK(tilde_factor(3, 0.1, 1.1) == doctest::Approx(e1 * e1 * e1 * e1).epsilon(1e-14));
  CHECK(tilde_factor(4, 0.1, 1.1) == doctest::Approx(e1 * e1).epsilon(1e-14));
  CHECK(tilde_factor(3, 0.1, 0.05) == 1.0);
  CHECK(tilde_factor(3, 0.1, 0.1 + 1e-3) == 1.0);
  CHECK_THROWS_WITH_AS(tilde_factor(2, 0.1, 0.5), doctest::Contains("unsupported-dimension"), Error);

  const double delta = 0.05;
  const MetricField gt = tilde_g_delta(3, delta);
  const MetricField round = round_metric(3);
  for (double f : {0.5 * delta, delta + 1e-3}) {
    const Point p = chart_point(3, f, 1);
    CHECK(max_entry_diff(metric_value(gt, p), metric_value(round, p), 3) == 0.0);
    CHECK(std::abs(scalar_curvature(gt, p) - 6.0) < 1e-11);
  }
  const Point mid = chart_point(3, 0.5);
  const double factor = tilde_factor(3, delta, 0.5);
  const Mat a = metric_value(gt, mid), b = metric_value(round, mid);
  for (int i = 0; i < 3; ++i) CHECK(a[i][i] == doctest::Approx(factor * b[i][i]).epsilon(1e-13));
}

TEST_CASE("subharmonic flat function") {
  const SubharmonicReport r = subharmonic_check(3, 0.05, 200, 11);
  CHECK(r.pass);
  CHECK(r.max_formula_error < 1e-8);
  // The sufficient bound 1/(4x^4) - n f / x^2 is smallest at the top of the collar, x = 2 delta.
  const double worst = 1.0 / (4.0 * std::pow(0.1, 4)) - 3.0 * 0.15 / (0.1 * 0.1);
  CHECK(r.min_sufficient >= worst);
  CHECK(r.min_sufficient < 1.05 * worst);
  CHECK(r.min_laplacian >= 0.0);
  CHECK_THROWS_WITH_AS(subharmonic_check(3, 0.2, 10, 1), doctest::Contains("invalid-delta"), Error);
  CHECK_THROWS_WITH_AS(r_tilde_check(3, 0.0, 10, 1), doctest::Contains("invalid-delta"), Error);
}

TEST_CASE("scalar curvature of the flattened metric") {
  for (int n : {3, 4}) {
    const RTildeReport r = r_tilde_check(n, 0.05, 150, 3);
    CHECK(r.pass);
    CHECK(r.max_relative_error < 1e-8);
    CHECK(r.min_excess >= 0.0);
    CHECK(r.min_scaled_excess > 0.0);
    CHECK(r.resolved > 0);
    CHECK(r.min_resolved_excess > 0.0);
  }
}

TEST_CASE("moebius map") {
  CHECK(tau_for_delta(0.1) == doctest::Approx(-0.1010205144).epsilon(1e-9));
  for (double delta : {0.1, 0.01, 0.3}) {
    const double tau = tau_for_delta(delta);
    CHECK(std::abs(delta * tau * tau + tau + delta) < 1e-12);
    const double q = (1.0 + tau * tau) / (1.0 - tau * tau);
    CHECK(q * q == doctest::Approx(1.0 / (1.0 - 4.0 * delta * delta)).epsilon(1e-13));
  }
  CHECK_THROWS_WITH_AS(tau_for_delta(0.5), doctest::Contains("invalid-delta"), Error);
  CHECK_THROWS_WITH_AS(psi_tau(1.0, Point{0.0, 0.0, 1.0}), doctest::Contains("invalid-tau"), Error);

  const Point north{0.0, 0.0, 0.0, 1.0};
  const Point moved = psi_tau(-0.3, north);
  for (int i = 0; i < 4; ++i) CHECK(moved[i] == doctest::Approx(north[i]).epsilon(1e-15));
  const Point x{0.3, -0.4, 0.5, std::sqrt(1.0 - 0.5)};
  const Point same = psi_tau(0.0, x);
  for (int i = 0; i < 4; ++i) CHECK(same[i] == x[i]);

  // The level f = 2 delta is sent to the equator.
  const double delta = 0.1;
  const double tau = tau_for_delta(delta);
  const double s = std::sqrt(1.0 - 4.0 * delta * delta);
  const Point rim = psi_tau(tau, Point{s, 0.0, 0.0, 2.0 * delta});
  CHECK(std::abs(rim[3]) < 1e-15);
  double norm = 0.0;
  for (double v : rim) norm += v * v;
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-14));

  // Chart dilation against the ambient formula.
  const double k = psi_dilation(tau);
  for (const Point& y : random_ball_points(3, 20, 1.5, 4)) {
    const Point image = to_chart(psi_tau(tau, to_ambient(y)));
    for (int i = 0; i < 3; ++i) CHECK(image[i] == doctest::Approx(k * y[i]).epsilon(1e-12));
  }

  // Pullback of the round metric is conformal with factor ((1 - tau^2) / (1 + tau^2 + 2 tau x_n))^2.
  const MetricField pulled = pullback_field(psi_tau_chart(tau), round_metric(3));
  for (const Point& y : random_ball_points(3, 10, 1.2, 8)) {
    const Point amb = to_ambient(y);
    const double c = (1.0 - tau * tau) / (1.0 + tau * tau + 2.0 * tau * amb[3]);
    const Mat a = metric_value(pulled, y), b = metric_value(round_metric(3), y);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(a[i][j] - c * c * b[i][j]) < 1e-12);
  }
}

TEST_CASE("scaled pullback meets the flattened metric on the boundary") {
  for (double delta : {0.05, 0.01}) {
    const MetricField gd = g_delta(round_metric(3), 3, delta);
    const MetricField gt = tilde_g_delta(3, delta);
    for (const Point& d : random_sphere_points(3, 8, radius_at_height(2.0 * delta), 2))
      CHECK(max_entry_diff(metric_value(gd, d), metric_value(gt, d), 3) < 1e-10);
  }
  CHECK(std::abs(1.0 - g_delta_scale(3, 0.01)) < 4.01e-4);

  // Mean curvature of the level f = 2 delta under e^{2w} gbar: e^{-w} (H_round + (n-1) d_nu w),
  // with H_round = (n-1) tan(asin f) and d_nu f = -sqrt(1 - f^2) for the outward normal.
  for (double delta : {0.05, 0.03}) {
    const double f = 2.0 * delta, x = delta;
    const double e = std::exp(-1.0 / x);
    const double w = 2.0 * std::log1p(-e);
    const double dw_df = -2.0 * e / (x * x) / (1.0 - e);
    const double expected = std::exp(-w) * (2.0 * std::tan(std::asin(f)) - 2.0 * dw_df * std::sqrt(1.0 - f * f));
    const Hypersurface edge = chart_sphere(3, radius_at_height(f));
    const Point b = chart_point(3, f, 2);
    CHECK(mean_curvature(tilde_g_delta(3, delta), edge, b) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("warped collar") {
  CollarParams flat;
  flat.kappa = 0.0;
  for (double s : {0.0, 0.1, 0.4}) CHECK(warped_scalar(4, collar_warp(flat, s)) == doctest::Approx(12.0).epsilon(1e-13));
  const CollarParams p;
  for (int n : {3, 4, 5})
    CHECK(warped_scalar(n, collar_warp(p, 0.0)) == doctest::Approx(n * (n - 1.0) + 4.0 * p.kappa * (n - 1)).epsilon(1e-13));

  // Finite differences of the warp.
  for (double s : {0.05, 0.12, 0.3}) {
    const double h = 1e-5;
    const WarpValue w = collar_warp(p, s);
    CHECK(std::abs((collar_warp(p, s + h).phi - collar_warp(p, s - h).phi) / (2 * h) - w.d1) < 1e-8);
    CHECK(std::abs((collar_warp(p, s + h).d1 - collar_warp(p, s - h).d1) / (2 * h) - w.d2) < 1e-7);
  }

  const MetricField g = collar_metric(3, p);
  for (double s : {0.02, 0.08, 0.14, 0.6}) {
    const Point y = chart_point(3, std::sin(s), 1);
    const double direct = scalar_curvature(g, y);
    CHECK(direct == doctest::Approx(warped_scalar(3, collar_warp(p, s))).epsilon(1e-9));
  }
  // The equator stays totally geodesic.
  const Hypersurface equator = chart_sphere(3, 1.0);
  for (const Point& b : random_sphere_points(3, 6, 1.0, 5)) {
    const SurfaceGeometry sg = surface_geometry(g, equator, b);
    for (int i = 0; i < sg.k; ++i)
      for (int j = 0; j < sg.k; ++j) CHECK(std::abs(sg.second_form[i][j]) < 1e-12);
  }
  // Away from the collar the metric is round.
  const Point far = chart_point(3, 0.999, 0);
  CHECK(max_entry_diff(metric_value(g, far), metric_value(round_metric(3), far), 3) < 1e-6);
}

TEST_CASE("narrow collar is rejected") {
  DeformationResult def;
  def.spec.n = 3;
  CorollaryOptions opts;
  opts.collar.width = 0.04;
  CHECK_THROWS_WITH_AS(build_corollary(def, opts), doctest::Contains("collar-rejected"), Error);
  opts.collar.width = 0.16;
  opts.collar.collar = 1.5;
  CHECK_THROWS_WITH_AS(build_corollary(def, opts), doctest::Contains("invalid-collar"), Error);
  def.spec.n = 2;
  CHECK_THROWS_WITH_AS(build_corollary(def, {}), doctest::Contains("unsupported-dimension"), Error);
}
