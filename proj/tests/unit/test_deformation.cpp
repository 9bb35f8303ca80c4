#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hemiglue/deformation.hpp"
#include "hemiglue/error.hpp"
#include "hemiglue/functional.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

namespace {

constexpr double kPi = std::numbers::pi;

// Hand-expanded polynomial for n = 3: -1 + u^2 + u^4/3 + u^6/5.
double psi3(double u) { return -1.0 + u * u + std::pow(u, 4) / 3.0 + std::pow(u, 6) / 5.0; }
double psi3_d1(double u) { return 2.0 * u + 4.0 * std::pow(u, 3) / 3.0 + 6.0 * std::pow(u, 5) / 5.0; }
double psi3_d2(double u) { return 2.0 + 4.0 * u * u + 6.0 * std::pow(u, 4); }

struct Solved {
  EtaSpec spec;
  QuadratureRule rule;
  MuResult mu;
  USolution u;
};

const Solved& solved(int n, int degree) {
  static std::map<std::pair<int, int>, Solved> cache;
  auto it = cache.find({n, degree});
  if (it == cache.end()) {
    Solved s;
    s.spec = choose_c(n);
    s.rule = harmonic_rule(n, degree);
    s.mu = compute_mu(s.spec, s.rule);
    s.u = solve_u(s.spec, s.mu, build_harmonic_basis(n, degree, TrialSpace::Dirichlet, s.rule), s.rule);
    it = cache.emplace(std::make_pair(n, degree), std::move(s)).first;
  }
  return it->second;
}

const DeformationResult& deformation3() {
  static const DeformationResult r = build_deformation(3);
  return r;
}

}  // namespace

TEST_CASE("boundary profile polynomial") {
  const EvenSextic psi = build_psi(3);
  CHECK(psi.value(1.0) == doctest::Approx(8.0 / 15.0).epsilon(1e-14));
  CHECK(psi_identity_coefficient(3) == doctest::Approx(8.0));
  for (double u = -1.0; u <= 1.0; u += 0.05) {
    CHECK(std::abs(psi.value(u) - psi3(u)) < 1e-14);
    CHECK(std::abs(psi.d1(u) - psi3_d1(u)) < 1e-13);
    CHECK(std::abs(psi.d2(u) - psi3_d2(u)) < 1e-13);
    // Laplacian on the unit 2-sphere of a function of the height.
    const double lap = (1.0 - u * u) * psi3_d2(u) - 2.0 * u * psi3_d1(u);
    CHECK(std::abs(lap + 2.0 * psi3(u) + 8.0 * std::pow(u, 6)) < 1e-12);
  }
  for (int n = 3; n <= 5; ++n) CHECK(check_psi_identity(n, 401).max_residual < 1e-10);
  CHECK_THROWS_AS(build_psi(2), Error);
}

TEST_CASE("boundary integrals and the choice of c") {
  const EtaSpec s = choose_c(3);
  CHECK(s.p0 == doctest::Approx(20096.0 * kPi / 45045.0).epsilon(1e-9));
  CHECK(s.psi_integral == doctest::Approx(-16.0 * kPi / 7.0).epsilon(1e-12));
  CHECK(s.area == doctest::Approx(4.0 * kPi).epsilon(1e-13));
  // Positive root of p0 + 4 c S - 2 c^2 A.
  const double a = 2.0 * s.area, b = -4.0 * s.psi_integral;
  const double root = (-b + std::sqrt(b * b + 4.0 * a * s.p0)) / (2.0 * a);
  CHECK(s.threshold == doctest::Approx(root).epsilon(1e-12));
  CHECK(s.threshold == doctest::Approx(0.0469).epsilon(2e-3));
  CHECK(s.c == doctest::Approx(0.5 * root).epsilon(1e-12));
  CHECK(s.quadratic == doctest::Approx(s.quadratic_at(s.c)).epsilon(1e-10));
  for (int n = 3; n <= 5; ++n) {
    const EtaSpec e = choose_c(n);
    CHECK(e.p0 > 0.0);
    CHECK(e.c > 0.0);
    CHECK(e.c < e.threshold);
    CHECK(e.quadratic > 0.0);
    CHECK(e.max_operator < 0.0);
    CHECK(std::abs(e.quadratic_at(e.threshold)) < 1e-9 * e.p0);
  }
}

TEST_CASE("vector field on the equator") {
  for (int n = 3; n <= 5; ++n) {
    const EtaSpec spec = choose_c(n);
    for (const Point& p : random_sphere_points(n, 20, 1.0, 11 + n)) {
      const BoundaryFieldCheck c = check_X_on_equator(spec, p);
      CHECK(c.normal_residual < 1e-10);
      CHECK(c.derivative_residual < 1e-9);
      CHECK(c.lie_residual < 1e-10);
    }
  }
}

TEST_CASE("gauge families") {
  const int n = 3;
  const EtaSpec spec = choose_c(n);
  const auto inside = random_ball_points(n, 10, 0.9, 5);
  const MetricField g1 = family_g1(spec, 0.05);
  for (const Point& p : inside) CHECK(std::abs(scalar_curvature(g1, p) - 6.0) < 1e-7);
  for (const Point& p : random_sphere_points(n, 10, 1.0, 6)) {
    const Mat g = metric_value(family_g0(spec, 0.1), p);
    const Mat r = metric_value(round_metric(n), p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(std::abs(g[i][j] - r[i][j]) < 1e-12);
  }
  const double h = 1e-3;
  for (const Point& p : inside) {
    CHECK(std::abs(compute_Q(spec, p).first) < 1e-7);
    const double d1 = (scalar_curvature(family_g1(spec, h), p) - scalar_curvature(family_g1(spec, -h), p)) / (2.0 * h);
    CHECK(std::abs(d1) < 1e-6);
  }
  const VectorField zero{n, [](const JetVec& y) { return JetVec(y.size(), Jet(y[0].dim(), y[0].order())); }};
  CHECK(compute_Q(gauge_sample(zero, inside[0])).second == doctest::Approx(0.0));
  CHECK_THROWS_AS(compute_Q(gauge_sample(zero, inside[0]), 0.5), Error);
}

TEST_CASE("second variation chain") {
  const Solved& s = solved(3, 16);
  CHECK(s.mu.qf_integral > 0.0);
  CHECK(s.mu.f_integral == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
  CHECK(s.mu.orthogonality < 1e-9 * s.mu.q_sup);
  const auto hemi = build_quadrature(3, QuadTarget::Hemisphere, 20, true);
  const auto eq = build_quadrature(3, QuadTarget::Equator, 20, true);
  const EnergyChain c = energy_chain(s.spec, s.mu, hemi, eq);
  CHECK(c.spread < 0.01);
  CHECK(c.boundary_form == doctest::Approx(c.qf_integral).epsilon(1e-3));
  for (int n = 4; n <= 5; ++n) CHECK(solved(n, 16).mu.mu > 0.0);
}

TEST_CASE("correction solve on exact eigenfunctions") {
  const Solved& s = solved(3, 16);
  const HarmonicBasis& basis = s.u.basis;
  std::size_t k3 = basis.size(), k1 = basis.size();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis.elements[k].degree == 3 && k3 == basis.size()) k3 = k;
    if (basis.elements[k].degree == 1) k1 = k;
  }
  REQUIRE(k3 < basis.size());
  REQUIRE(k1 < basis.size());
  const auto values_of = [&](std::size_t k) {
    MuResult m;
    for (const Point& p : s.rule.nodes) {
      const Point x = to_ambient(p);
      m.q_nodes.push_back(basis.evaluate_element(k, x[2], x[3]));
      m.q_sup = std::max(m.q_sup, std::abs(m.q_nodes.back()));
    }
    return m;
  };
  const USolution u = solve_u(s.spec, values_of(k3), basis, s.rule);
  const ScalarField y3 = basis.element_field(k3);
  for (const Point& p : random_ball_points(3, 30, 1.0, 9)) {
    const auto c = coordinate_jets(p, 0);
    CHECK(std::abs(u.field(c).value() + y3(c).value() / 12.0) < 1e-10);
  }
  CHECK_THROWS_WITH_AS(solve_u(s.spec, values_of(k1), basis, s.rule), doctest::Contains("kernel-obstruction"), Error);
}

TEST_CASE("correction solve for the construction") {
  const Solved& s = solved(3, 16);
  CHECK(s.u.f_mode < 1e-6 * s.mu.q_sup);
  for (const Point& p : random_sphere_points(3, 50, 1.0, 21))
    CHECK(std::abs(s.u.field(coordinate_jets(p, 0)).value()) < 1e-10);
  // Spectral convergence of the residual in the basis degree.
  const auto pts = interior_samples(3, 300, 4);
  const double r12 = pde_residual(s.spec, solved(3, 12).u, s.mu.mu, pts) / s.mu.q_sup;
  const double r16 = pde_residual(s.spec, s.u, s.mu.mu, pts) / s.mu.q_sup;
  const double r20 = pde_residual(s.spec, solved(3, 20).u, s.mu.mu, pts) / s.mu.q_sup;
  CHECK(r16 < 0.1 * r12);
  CHECK(r20 < 0.1 * r16);
  CHECK(r20 < 1e-4);
}

TEST_CASE("taylor coefficients of the deformed family") {
  const Solved& s = solved(3, 24);
  const double h = 2e-3;
  for (const Point& p : random_ball_points(3, 100, 0.999, 31)) {
    const auto r = [&](double t) { return scalar_curvature(family_g(s.spec, s.u.field, t), p); };
    const double d2 = (-r(2 * h) + 16.0 * r(h) - 30.0 * r(0.0) + 16.0 * r(-h) - r(-2 * h)) / (12.0 * h * h);
    CHECK(d2 == doctest::Approx(s.mu.mu).epsilon(0.01));
  }
  const Hypersurface sigma = chart_sphere(3, 1.0);
  for (const Point& p : random_sphere_points(3, 20, 1.0, 32)) {
    const double u = p[2];
    const double eta = psi3(u) - s.spec.c;
    const double lap = (1.0 - u * u) * psi3_d2(u) - 2.0 * u * psi3_d1(u);
    const double d1 = (mean_curvature(family_g(s.spec, s.u.field, h), sigma, p) -
                       mean_curvature(family_g(s.spec, s.u.field, -h), sigma, p)) /
                      (2.0 * h);
    CHECK(d1 == doctest::Approx(-(lap + 2.0 * eta)).epsilon(0.01));
  }
}

TEST_CASE("small deformation raises scalar curvature and bends the equator") {
  const DeformationResult& r = deformation3();
  CHECK(r.accepted.pass);
  CHECK(r.accepted.r_margin > 0.0);
  CHECK(r.accepted.h_margin > 0.0);
  CHECK(r.accepted.boundary_match < 1e-10);
  CHECK(r.t == doctest::Approx(r.accepted.t));
  CHECK(r.scan.size() == 11);
  CHECK(std::abs(r.r_slope - 2.0) < 0.1);
  CHECK(std::abs(r.h_slope - 1.0) < 0.1);
  const Margins& a = r.scan[r.scan.size() - 2];
  const Margins& b = r.scan.back();
  CHECK(a.r_margin / b.r_margin > 3.5);
  CHECK(a.r_margin / b.r_margin < 4.5);
  CHECK(a.h_margin / b.h_margin > 1.8);
  CHECK(a.h_margin / b.h_margin < 2.2);
  CHECK(scalar_curvature(r.metric, Point{0.1, 0.2, 0.3}) > 6.0);
}

TEST_CASE("zonal grid covers the (x_n, f) half disc") {
  for (int n = 3; n <= 5; ++n) {
    const auto pts = zonal_grid(n, 8, 16);
    CHECK(pts.size() == 8u * 17u);
    double f_min = 1.0, f_max = 0.0, xn_min = 1.0, xn_max = -1.0;
    for (const Point& y : pts) {
      const Point x = to_ambient(y);
      double norm = 0.0;
      for (double c : x) norm += c * c;
      CHECK(std::abs(norm - 1.0) < 1e-14);
      CHECK(x[0] >= -1e-15);
      for (int k = 1; k + 1 < n; ++k) CHECK(x[static_cast<std::size_t>(k)] == 0.0);
      const double f = x[static_cast<std::size_t>(n)], xn = x[static_cast<std::size_t>(n - 1)];
      f_min = std::min(f_min, f), f_max = std::max(f_max, f);
      xn_min = std::min(xn_min, xn), xn_max = std::max(xn_max, xn);
    }
    CHECK(f_min > 0.0);
    CHECK(f_min < 0.1);
    CHECK(f_max > 0.99);
    CHECK(xn_min < -0.99);
    CHECK(xn_max > 0.99);
  }
}
