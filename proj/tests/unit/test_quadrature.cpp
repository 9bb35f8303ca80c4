#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hemiglue/error.hpp"
#include "hemiglue/harmonic.hpp"
#include "hemiglue/quadrature.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

namespace {
constexpr double pi = std::numbers::pi;

// Moments of x_n over S^{n-1}: int x^a = ((n+a)/(a+1)) int x^{a+2}, from int 1 = area.
double equator_moment(int n, int a) {
  double m = sphere_area(n - 1);
  for (int k = 0; k < a; k += 2) m *= (k + 1.0) / (n + k);
  return m;
}
}  // namespace

TEST_CASE("gauss rules integrate polynomials exactly") {
  const auto gl = gauss_legendre(10);
  double s = 0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * std::pow(gl.x[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19).epsilon(1e-14));
  // int (1-x^2)^{1/2} x^2 dx = pi/8
  const auto gj = gauss_jacobi(6, 0.5, 0.5);
  s = 0;
  for (std::size_t i = 0; i < gj.x.size(); ++i) s += gj.w[i] * gj.x[i] * gj.x[i];
  CHECK(s == doctest::Approx(pi / 8).epsilon(1e-14));
  const auto a = gauss_jacobi(12, 0.0, 0.0);
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    CHECK(a.x[i] == doctest::Approx(gauss_legendre(12).x[i]).epsilon(1e-13));
    CHECK(a.w[i] > 0);
  }
}

TEST_CASE("equator and hemisphere volumes") {
  for (int n = 3; n <= 5; ++n) {
    for (bool sym : {true, false}) {
      const auto eq = equator_rule(n, 12, sym);
      CHECK(eq.integrate([](const Point&) { return 1.0; }) == doctest::Approx(sphere_area(n - 1)).epsilon(1e-12));
      const auto hs = hemisphere_rule(n, 48, 12, sym);
      CHECK(hs.integrate([](const Point&) { return 1.0; }) == doctest::Approx(0.5 * sphere_area(n)).epsilon(1e-12));
      for (double w : hs.weights) CHECK(w > 0);
      const double fint = hs.integrate([](const Point& y) { return to_ambient(y).back(); });
      CHECK(fint == doctest::Approx(ball_volume(n)).epsilon(1e-12));
    }
  }
  CHECK(0.5 * sphere_area(3) == doctest::Approx(pi * pi));
}

TEST_CASE("equator moments follow the recursion") {
  for (int n = 3; n <= 5; ++n) {
    const auto sym = equator_rule(n, 64, true);
    const auto full = equator_rule(n, 14, false);
    for (int a = 0; a <= 20; a += 2) {
      const auto xa = [n, a](const Point& y) { return std::pow(y[static_cast<std::size_t>(n - 1)], a); };
      CHECK(sym.integrate(xa) == doctest::Approx(equator_moment(n, a)).epsilon(1e-12));
      if (a <= 12) CHECK(full.integrate(xa) == doctest::Approx(equator_moment(n, a)).epsilon(1e-12));
    }
  }
  CHECK(equator_moment(3, 2) == doctest::Approx(4 * pi / 3));
  CHECK(equator_moment(3, 8) == doctest::Approx(4 * pi / 9));
  CHECK(equator_moment(4, 2) == doctest::Approx(pi * pi / 2));
}

TEST_CASE("degree above the cap is rejected") {
  try {
    (void)build_quadrature(3, QuadTarget::Equator, 61);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "unsupported-degree");
  }
}

TEST_CASE("odd harmonic basis") {
  for (int n = 3; n <= 5; ++n) {
    const int L = 16;
    const auto basis = build_harmonic_basis(n, L);
    CHECK(basis.size() == 72);
    CHECK(basis.gram_condition < 1e12);
    CHECK(basis.eigenvalue_error < 1e-6);
    std::vector<int> count(L + 1, 0);
    for (const auto& e : basis.elements) ++count[e.degree];
    for (int l = 1; l <= L; ++l) CHECK(count[l] == harmonic_multiplicity(l));
    // The l = 1 element is proportional to f.
    const auto& first = basis.elements.front();
    CHECK(first.degree == 1);
    const double ratio = basis.evaluate_element(0, 0.3, 0.4) / 0.4;
    CHECK(basis.evaluate_element(0, -0.5, 0.7) == doctest::Approx(ratio * 0.7));
    // Orthonormality under an independent finer rule.
    const auto fine = hemisphere_rule(n, 80, 40, true);
    std::vector<std::vector<double>> vals(basis.size());
    for (const auto& p : fine.nodes) {
      const auto x = to_ambient(p);
      for (std::size_t k = 0; k < basis.size(); ++k) vals[k].push_back(basis.evaluate_element(k, x[n - 1], x[n]));
    }
    double worst = 0;
    for (std::size_t i = 0; i < basis.size(); i += 7)
      for (std::size_t j = 0; j < basis.size(); ++j) {
        std::vector<double> prod(vals[i].size());
        for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = vals[i][q] * vals[j][q];
        worst = std::max(worst, std::abs(fine.sum(prod) - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst < 1e-8);
    // Vanishes on the equator.
    for (std::size_t k = 0; k < basis.size(); ++k) CHECK(std::abs(basis.evaluate_element(k, 0.37, 0.0)) < 1e-13);
  }
}

TEST_CASE("harmonic residual from the jet laplacian") {
  const auto basis = build_harmonic_basis(3, 16);
  const auto pts = random_ball_points(3, 40, 0.99, 9u);
  for (std::size_t k = 0; k < basis.size(); k += 5) CHECK(harmonic_residual(basis, k, pts) < 1e-7);
  bool found15 = false;
  for (const auto& e : basis.elements)
    if (e.degree == 3) found15 = std::abs(e.eigenvalue - 15.0) < 1e-6;
  CHECK(found15);
}

TEST_CASE("dirichlet trial space contains the odd harmonics") {
  const auto d = build_harmonic_basis(3, 12, TrialSpace::Dirichlet);
  CHECK(d.gram_condition < 1e12);
  int exact = 0;
  for (const auto& e : d.elements) exact += e.degree > 0 && e.degree <= 12 ? 1 : 0;
  CHECK(exact >= 42);
}
