#include <cmath>
#include <functional>

#include "doctest.h"
#include "hemiglue/error.hpp"
#include "hemiglue/jet.hpp"

using namespace hemi;

namespace {

using Fn = std::function<double(const std::vector<double>&)>;

// Central-difference oracle for first, second and third partials.
double fd(const Fn& f, std::vector<double> p, std::vector<int> idx, double h) {
  if (idx.empty()) return f(p);
  const int i = idx.back();
  idx.pop_back();
  auto plus = p, minus = p;
  plus[i] += h;
  minus[i] -= h;
  return (fd(f, plus, idx, h) - fd(f, minus, idx, h)) / (2 * h);
}

template <class JetFn, class NumFn>
void check_against_fd(JetFn jf, NumFn nf, std::vector<double> p) {
  const int dim = static_cast<int>(p.size());
  const Jet j = jf(coordinate_jets(p, 3));
  const Fn f = nf;
  CHECK(j.value() == doctest::Approx(f(p)).epsilon(1e-13));
  for (int a = 0; a < dim; ++a) {
    CHECK(j.d(a) == doctest::Approx(fd(f, p, {a}, 1e-5)).epsilon(1e-7));
    for (int b = 0; b < dim; ++b) {
      CHECK(j.d(a, b) == doctest::Approx(fd(f, p, {a, b}, 1e-4)).epsilon(1e-5));
      for (int c = 0; c < dim; ++c)
        CHECK(j.d(a, b, c) == doctest::Approx(fd(f, p, {a, b, c}, 2e-3)).epsilon(1e-3));
    }
  }
}

}  // namespace

TEST_CASE("jet arithmetic matches finite differences") {
  check_against_fd(
      [](const JetVec& y) { return y[0] * y[1] / (1.0 + y[2] * y[2]) - 3.0 * y[1]; },
      [](const std::vector<double>& y) { return y[0] * y[1] / (1.0 + y[2] * y[2]) - 3.0 * y[1]; },
      {0.3, -0.7, 0.4});
}

TEST_CASE("jet elementary functions match finite differences") {
  check_against_fd(
      [](const JetVec& y) { return exp(y[0] * y[1]) + log(2.0 + y[2]) * sin(y[0]) + cos(y[1]); },
      [](const std::vector<double>& y) {
        return std::exp(y[0] * y[1]) + std::log(2.0 + y[2]) * std::sin(y[0]) + std::cos(y[1]);
      },
      {0.2, 0.5, -0.3});
  check_against_fd(
      [](const JetVec& y) { return sqrt(1.0 + y[0] * y[0] + y[1]) * pow(1.5 + y[1], 2.5) + asin(0.5 * y[0]); },
      [](const std::vector<double>& y) {
        return std::sqrt(1.0 + y[0] * y[0] + y[1]) * std::pow(1.5 + y[1], 2.5) + std::asin(0.5 * y[0]);
      },
      {0.4, 0.1});
}

TEST_CASE("derivative blocks are exactly symmetric") {
  const JetVec y = coordinate_jets(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 3);
  const Jet j = exp(y[0] * y[1] * y[2]) / (1.0 + y[3] * y[0]);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(j.d(a, b) == j.d(b, a));
      for (int c = 0; c < 4; ++c) {
        CHECK(j.d(a, b, c) == j.d(b, a, c));
        CHECK(j.d(a, b, c) == j.d(c, b, a));
        CHECK(j.d(a, b, c) == j.d(a, c, b));
      }
    }
}

TEST_CASE("partial lowers order and differentiates") {
  const JetVec y = coordinate_jets(std::vector<double>{0.3, 0.6}, 3);
  const Jet j = y[0] * y[0] * y[0] * y[1];
  const Jet dx = j.partial(0);
  CHECK(dx.order() == 2);
  CHECK(dx.value() == doctest::Approx(3 * 0.09 * 0.6));
  CHECK(dx.d(0) == doctest::Approx(6 * 0.3 * 0.6));
  CHECK(dx.d(0, 1) == doctest::Approx(6 * 0.3));
  CHECK_THROWS_AS(Jet(2, 0, 1.0).partial(0), Error);
}

TEST_CASE("jet errors carry codes") {
  const JetVec y = coordinate_jets(std::vector<double>{0.0, 0.0}, 2);
  try {
    (void)(1.0 / y[0]);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "jet-singular");
  }
  try {
    (void)log(y[0] - 1.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "jet-domain");
  }
  try {
    (void)(Jet(2, 2) + Jet(3, 2));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == "jet-dim");
  }
  CHECK_THROWS_AS(Jet(6, 1), Error);
  CHECK_THROWS_AS(Jet(2, 4), Error);
}

TEST_CASE("mixed order arithmetic truncates to the lower order") {
  const JetVec a = coordinate_jets(std::vector<double>{0.5}, 3);
  const JetVec b = coordinate_jets(std::vector<double>{0.5}, 1);
  const Jet c = a[0] * b[0];
  CHECK(c.order() == 1);
  CHECK(c.d(0) == doctest::Approx(1.0));
}
