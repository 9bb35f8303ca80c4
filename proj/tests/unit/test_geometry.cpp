#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hemiglue/error.hpp"
#include "hemiglue/geometry.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

TEST_CASE("scalar curvature of space forms") {
  for (int n = 2; n <= 5; ++n) {
    const double expected = n * (n - 1.0);
    for (const auto& p : random_ball_points(n, 5, 0.95, 11u + n)) {
      CHECK(scalar_curvature(round_metric(n), p) == doctest::Approx(expected).epsilon(1e-10));
      CHECK(scalar_curvature(round_metric(n, 4.0), p) == doctest::Approx(expected / 4.0).epsilon(1e-10));
      CHECK(scalar_curvature(hyperbolic_metric(n), p) == doctest::Approx(-expected).epsilon(1e-10));
      CHECK(std::abs(scalar_curvature(euclidean_metric(n), p)) < 1e-14);
    }
  }
}

TEST_CASE("round Ricci equals (n-1) g") {
  const int n = 3;
  const std::vector<double> p{0.2, -0.4, 0.5};
  const auto c = curvature_at(round_metric(n), p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(c.ricci[i][j] == doctest::Approx((n - 1) * c.conn.g[i][j]).epsilon(1e-12));
}

TEST_CASE("scalar curvature of a conformal metric") {
  // e^{2u} delta in dimension n: R = -e^{-2u}(2(n-1) lap u + (n-2)(n-1)|du|^2).
  const int n = 4;
  MetricField g;
  g.dim = n;
  g.eval = [n](const JetVec& y) {
    const Jet u = 0.3 * sin(y[0]) * y[1] + 0.2 * y[2] * y[2] - 0.1 * y[3];
    JetMatrix m(n, y[0].dim(), y[0].order());
    for (int i = 0; i < n; ++i) m.set(i, i, exp(2.0 * u));
    return m;
  };
  const std::vector<double> p{0.3, 0.1, -0.2, 0.7};
  const double u = 0.3 * std::sin(p[0]) * p[1] + 0.2 * p[2] * p[2] - 0.1 * p[3];
  const double lap = -0.3 * std::sin(p[0]) * p[1] + 0.4;
  const double grad2 = std::pow(0.3 * std::cos(p[0]) * p[1], 2) + std::pow(0.3 * std::sin(p[0]), 2) +
                       std::pow(0.4 * p[2], 2) + 0.01;
  const double expected = -std::exp(-2 * u) * (2 * (n - 1) * lap + (n - 2) * (n - 1) * grad2);
  CHECK(scalar_curvature(g, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mean curvature of geodesic spheres in the round chart") {
  for (int n = 2; n <= 5; ++n) {
    for (double s : {0.3, 1.0, std::numbers::pi / 2, 2.0}) {
      const double r = std::tan(s / 2);
      const auto pts = random_sphere_points(n, 3, r, 7u);
      for (const auto& p : pts) {
        const double h = mean_curvature(round_metric(n), chart_sphere(n, r), p);
        CHECK(h == doctest::Approx((n - 1) / std::tan(s)).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("mean curvature of a flat sphere and its second form") {
  const int n = 3;
  const auto geo = surface_geometry(euclidean_metric(n), chart_sphere(n, 2.0), std::vector<double>{1.2, 0.0, 1.6});
  CHECK(geo.mean_curvature == doctest::Approx((n - 1) / 2.0));
  for (int a = 0; a < n - 1; ++a)
    for (int b = 0; b < n - 1; ++b)
      CHECK(geo.second_form_frame[a][b] == doctest::Approx(a == b ? 0.5 : 0.0).scale(1.0));
}

TEST_CASE("perturbed scalar curvature equals curvature of the sum") {
  const int n = 3;
  MetricField h;
  h.dim = n;
  h.eval = [n](const JetVec& y) {
    JetMatrix m(n, y[0].dim(), y[0].order());
    m.set(0, 0, 0.3 * sin(y[1]) * y[2]);
    m.set(0, 1, 0.2 * y[0] * y[2] + 0.1);
    m.set(1, 1, 0.15 * cos(y[0] + y[2]));
    m.set(1, 2, -0.25 * y[1] * y[1]);
    m.set(2, 2, 0.1 * exp(y[0]) - 0.05);
    m.set(0, 2, 0.07 * y[1]);
    return m;
  };
  const auto g = round_metric(n);
  for (const auto& p : random_ball_points(n, 6, 0.9, 3u)) {
    const double direct = scalar_curvature(add_fields(g, h, 1.0), p);
    CHECK(perturbed_scalar(g, h, p) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("linearized scalar curvature is the derivative of the perturbed one") {
  const int n = 3;
  MetricField h;
  h.dim = n;
  h.eval = [n](const JetVec& y) {
    JetMatrix m(n, y[0].dim(), y[0].order());
    m.set(0, 0, sin(y[1]) * y[2]);
    m.set(0, 1, y[0] * y[2] + 0.3);
    m.set(1, 1, cos(y[0] + y[2]));
    m.set(2, 2, exp(y[0]));
    m.set(0, 2, y[1] * y[1]);
    return m;
  };
  const auto g = round_metric(n);
  const std::vector<double> p{0.1, 0.4, -0.3};
  const double eps = 1e-4;
  const double plus = scalar_curvature(add_fields(g, h, eps), p);
  const double minus = scalar_curvature(add_fields(g, h, -eps), p);
  CHECK(linearized_scalar(g, h, p) == doctest::Approx((plus - minus) / (2 * eps)).epsilon(1e-6));
}

TEST_CASE("linearized scalar of a conformal variation") {
  // DR[u g] = -(n-1) lap u - R u  for a round background.
  const int n = 4;
  const auto g = round_metric(n);
  const ScalarField u = [](const JetVec& y) { return y[0] * y[1] + sin(y[3]); };
  MetricField h = conformal_round(n, u, 2, "u gbar");
  const std::vector<double> p{0.2, 0.3, -0.1, 0.4};
  const auto hl = hessian_laplacian(u, g, p);
  const double uval = 0.06 + std::sin(0.4);
  CHECK(linearized_scalar(g, h, p) == doctest::Approx(-(n - 1) * hl.laplacian - n * (n - 1) * uval).epsilon(1e-11));
}

TEST_CASE("lie derivative of the flat metric along a rotation vanishes") {
  const int n = 3;
  VectorField x{n, [](const JetVec& y) { return JetVec{-y[1], y[0], 0.0 * y[2]}; }};
  const auto lx = lie_derivative_field(x, round_metric(n));
  for (const auto& p : random_ball_points(n, 4, 0.9, 5u)) {
    const auto t = sample_tensor(lx, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(std::abs(t.v[i][j]) < 1e-13);
  }
}

TEST_CASE("lie derivative matches derivative of pullback by the flow") {
  const int n = 2;
  VectorField x{n, [](const JetVec& y) { return JetVec{0.3 + y[0] * y[1], 0.5 * y[0] * y[0] - 0.2 * y[1]}; }};
  const auto g = round_metric(n);
  const std::vector<double> p{0.2, -0.1};
  const double t = 1e-3;
  const auto lx = sample_tensor(lie_derivative_field(x, g), p);
  const auto plus = sample_metric(pullback_field(flow_map(x, t), g), p);
  const auto minus = sample_metric(pullback_field(flow_map(x, -t), g), p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(lx.v[i][j] == doctest::Approx((plus.v[i][j] - minus.v[i][j]) / (2 * t)).epsilon(1e-6));
}

TEST_CASE("flow of a linear field is the matrix exponential") {
  VectorField x{2, [](const JetVec& y) { return JetVec{-y[1], y[0]}; }};
  const std::vector<double> p{1.0, 0.0};
  const auto r = flow(x, p, std::numbers::pi / 3, 1);
  CHECK(r.point[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(r.point[1] == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-10));
  CHECK(r.jacobian[0][1] == doctest::Approx(-std::sqrt(3.0) / 2).epsilon(1e-10));
}

TEST_CASE("metric invariants are enforced") {
  const std::vector<double> outside{0.8, 0.8};
  try {
    (void)sample_metric(hyperbolic_metric(2), outside);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "outside-domain");
  }
  MetricField bad;
  bad.dim = 2;
  bad.eval = [](const JetVec& y) {
    JetMatrix m(2, y[0].dim(), y[0].order());
    m.set(0, 0, 1.0 + 0.0 * y[0]);
    m.set(1, 1, -1.0 + 0.0 * y[0]);
    return m;
  };
  try {
    (void)sample_metric(bad, std::vector<double>{0.0, 0.0});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "metric-singular");
  }
}

TEST_CASE("chart round trip and equator laplacian") {
  const std::vector<double> y{0.3, -0.2, 0.5};
  const auto x = to_ambient(y);
  double s = 0;
  for (double c : x) s += c * c;
  CHECK(s == doctest::Approx(1.0));
  const auto back = to_chart(x);
  for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(y[i]));
  // Spherical harmonic x_n is an eigenfunction with eigenvalue n-1 on S^{n-1}.
  for (int n = 2; n <= 5; ++n) {
    const auto d = equator_laplacian(0.3, 1.0, 0.0, n);
    CHECK(d.laplacian == doctest::Approx(-(n - 1) * 0.3));
  }
}
