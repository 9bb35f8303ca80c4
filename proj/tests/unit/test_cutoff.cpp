#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "hemiglue/cutoff.hpp"

using namespace hemi;

namespace {

// Adaptive Simpson quadrature, independent of the library's Gauss rules.
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double left = (m - a) / 6.0 * (fa + 4.0 * f(lm) + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * f(rm) + fb);
  if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, 0.5 * tol, depth + 1) + simpson(f, m, b, 0.5 * tol, depth + 1);
}

const CutoffChi& chi() {
  static const CutoffChi c = build_chi();
  return c;
}

}  // namespace

TEST_CASE("chi closed-form piece") {
  const CutoffChi& c = chi();
  CHECK(c.value(0.25) == 7.0 / 32.0);
  CHECK(c.value(0.5) == 0.375);
  CHECK(c.d1(0.5) == 0.5);
  CHECK(c.value(0.0) == 0.0);
  CHECK(c.d1(0.0) == 1.0);
  CHECK(c.d2(0.3) == -1.0);
}

TEST_CASE("bump integrates to one and chi flattens") {
  const CutoffChi& c = chi();
  const auto bump = [&](double s) { return c.bump(s); };
  const double mass = 0.5 + simpson(bump, 0.5, 1.0, 1e-14);
  CHECK(std::abs(mass - 1.0) < 1e-10);
  CHECK(std::abs(c.bump_integral() - 1.0) < 1e-10);
  CHECK(c.alpha() > 0.0);
  CHECK(std::abs(c.d1(1.0 - 1e-9)) < 1e-10);
  CHECK(c.d1(1.5) == 0.0);
  CHECK(c.d2(1.2) == 0.0);
  CHECK(c.limit() > 0.375);
  CHECK(c.limit() <= 0.625);
  CHECK(c.value(3.0) == c.limit());
}

TEST_CASE("chi is concave and nondecreasing") {
  const CutoffChi& c = chi();
  for (int k = 0; k < 1000; ++k) CHECK(c.d2(k / 1000.0) < 0.0);
  for (int k = 0; k <= 1500; ++k) CHECK(c.d1(k / 1000.0) >= 0.0);
}

TEST_CASE("chi table against direct integration") {
  const CutoffChi& c = chi();
  const auto bump = [&](double s) { return c.bump(s); };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (int k = 0; k < 25; ++k) {
    const double s = u(rng);
    // chi'(s) = 1/2 - int bump; chi(s) = 3/8 + (s - 1/2)/2 - int (s - u) bump(u) du.
    const double d1 = 0.5 - simpson(bump, 0.5, s, 1e-14);
    const double v = 0.375 + 0.5 * (s - 0.5) - simpson([&](double x) { return (s - x) * c.bump(x); }, 0.5, s, 1e-14);
    CHECK(std::abs(c.d1(s) - d1) < 1e-10);
    CHECK(std::abs(c.value(s) - v) < 1e-10);
  }
}

TEST_CASE("chi jets follow the stored derivatives") {
  const CutoffChi& c = chi();
  for (double s : {0.2, 0.55, 0.7, 0.83, 0.97}) {
    const double p[1] = {s};
    const Jet j = c.of(Jet::coordinate(1, 0, p, 3));
    CHECK(j.value() == doctest::Approx(c.value(s)));
    CHECK(j.d(0) == doctest::Approx(c.d1(s)));
    CHECK(j.d(0, 0) == doctest::Approx(c.d2(s)));
    CHECK(j.d(0, 0, 0) == doctest::Approx(c.d3(s)));
    const double h = 1e-5;
    CHECK(std::abs((c.value(s + h) - c.value(s - h)) / (2 * h) - c.d1(s)) < 1e-8);
    CHECK(std::abs((c.d1(s + h) - c.d1(s - h)) / (2 * h) - c.d2(s)) < 1e-6);
    const Jet r = c.ratio(Jet::coordinate(1, 0, p, 2));
    CHECK(r.value() == doctest::Approx(c.value(s) / s));
  }
  const double p[1] = {0.1};
  CHECK(c.ratio(Jet::coordinate(1, 0, p, 2)).value() == 0.95);
}

TEST_CASE("beta cut-off") {
  const CutoffBeta b = build_beta();
  CHECK(b.value(-0.5) == 0.5);
  CHECK(b.value(0.0) == 0.5);
  CHECK(b.value(-1.0) == 0.5);
  CHECK(b.value(-3.0) == 0.0);
  CHECK(b.value(-2.0) == 0.0);
  CHECK(std::abs(b.value(-1.5) - 0.25) < 1e-15);
  for (double s = -2.0; s <= 0.0; s += 0.01) {
    CHECK(b.value(s) >= 0.0);
    CHECK(b.value(s) <= 0.5);
  }
  const double p[1] = {-1.3};
  const Jet j = b.of(Jet::coordinate(1, 0, p, 2));
  const double h = 1e-5;
  CHECK(j.d(0) == doctest::Approx((b.value(-1.3 + h) - b.value(-1.3 - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("smoothstep symmetry") {
  for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(std::abs(smoothstep(x) + smoothstep(1.0 - x) - 1.0) < 1e-15);
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(2.0) == 1.0);
}
