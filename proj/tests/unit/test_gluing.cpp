#include <cmath>

#include "doctest.h"
#include "hemiglue/error.hpp"
#include "hemiglue/gluing.hpp"
#include "hemiglue/sphere.hpp"

using namespace hemi;

namespace {

constexpr int kDim = 3;
constexpr double kHeight = 0.3;

// gt = (1 + c rho) gbar, so T = c gbar near the boundary of the cap {f >= 0.3}.
CornerData scaled_corner(double c, double cut_start = 0.4, double cut_end = 1.2) {
  const MetricField g = round_metric(kDim);
  MetricField gt = g;
  const double base = std::asin(kHeight);
  gt.eval = [g, base, c](const JetVec& y) { return (1.0 + c * (asin(height(y)) - base)) * g.eval(y); };
  return radial_corner(kDim, g, gt, kHeight, cut_start, cut_end, "scaled");
}

const CutoffChi& chi() {
  static const CutoffChi c = build_chi();
  return c;
}

double max_entry_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

}  // namespace

TEST_CASE("corner data for a scaled collar") {
  const CornerData d = scaled_corner(2.0);
  const CornerReport r = validate_corner(d, 16, 3);
  CHECK(r.boundary_mismatch < 1e-10);
  CHECK(r.rho_value < 1e-12);
  CHECK(r.grad_rho_error < 1e-9);
  // T = 2 gbar: the boundary trace is 2(n-1) and H drops by n-1.
  CHECK(r.min_trace == doctest::Approx(2.0 * (kDim - 1)).epsilon(1e-10));
  CHECK(r.min_gap == doctest::Approx(kDim - 1.0).epsilon(1e-8));
  CHECK(r.gap_residual < 1e-8);
  CHECK(r.second_form_residual < 1e-8);
  CHECK(r.identity_residual < 1e-10);
  CHECK(r.a_estimate == doctest::Approx(2.0 * (kDim - 1)).epsilon(1e-9));

  // Foot tensor against the closed form T = 2 gbar and its derivatives.
  for (const Point& b : d.boundary_samples(5, 9)) {
    const FootTensor ft = foot_tensor(d, b);
    const TensorJet gbar = sample_metric(round_metric(kDim), b);
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        CHECK(std::abs(ft.value[i][j] - 2.0 * gbar.v[i][j]) < 1e-12);
        for (int l = 0; l < kDim; ++l) CHECK(std::abs(ft.grad[l][i][j] - 2.0 * gbar.d1[l][i][j]) < 1e-9);
      }
  }
}

TEST_CASE("corner validation errors") {
  const MetricField g = round_metric(kDim);
  CHECK_THROWS_WITH_AS(validate_corner(radial_corner(kDim, g, round_metric(kDim, 1.01), kHeight, 0.4, 1.2, "x")),
                       doctest::Contains("corner-mismatch"), Error);
  CHECK_THROWS_WITH_AS(validate_corner(scaled_corner(-2.0)), doctest::Contains("mean-curvature-gap-violated"), Error);
  CHECK_THROWS_AS(radial_corner(kDim, g, g, kHeight, 0.5, 0.4, "x"), Error);
}

TEST_CASE("branch formulas and exact regions") {
  const CornerData d = scaled_corner(2.0);
  const CutoffBeta beta = build_beta();
  CHECK_THROWS_WITH_AS(hat_g(d, chi(), beta, 0.5), doctest::Contains("lambda-unrepresentable"), Error);
  CHECK_THROWS_WITH_AS(hat_g(d, chi(), beta, 16.0), doctest::Contains("lambda-unrepresentable"), Error);

  const Point b = d.boundary_samples(1, 4)[0];
  // Both branches reduce to g + (rho - lambda rho^2 / 2) T on the overlap.
  const double lambda = 3.0;
  const double rho = 0.9 * std::exp(-lambda * lambda);
  const Point p = d.along_normal(b, rho);
  const double r = d.rho_value(p);
  const Mat gbar = metric_value(round_metric(kDim), p);
  const Mat outer = metric_value(hat_g_branch(d, chi(), beta, lambda, Branch::Outer), p);
  const Mat inner = metric_value(hat_g_branch(d, chi(), beta, lambda, Branch::Inner), p);
  Mat closed{};
  for (int i = 0; i < kDim; ++i) closed[i][i] = gbar[i][i] * (1.0 + 2.0 * (r - 0.5 * lambda * r * r));
  CHECK(max_entry_diff(outer, closed) < 1e-12);
  CHECK(max_entry_diff(inner, closed) < 1e-12);
  CHECK(branch_at(d, lambda, p) == Branch::Inner);

  // Exactly gt where rho <= exp(-2 lambda^2), exactly g outside U.
  const MetricField glued = hat_g(d, chi(), beta, 2.0);
  const Point deep = d.along_normal(b, 0.5 * std::exp(-8.0));
  CHECK(branch_at(d, 2.0, deep) == Branch::Tilde);
  CHECK(max_entry_diff(metric_value(glued, deep), metric_value(d.gt, deep)) == 0.0);
  const Point far = d.along_normal(b, 1.25);
  CHECK(branch_at(d, 2.0, far) == Branch::Base);
  CHECK(max_entry_diff(metric_value(glued, far), metric_value(d.g, far)) == 0.0);
}

TEST_CASE("seam jets agree") {
  const CornerData d = scaled_corner(2.0);
  const CutoffBeta beta = build_beta();
  for (double lambda : {2.0, 3.0, 4.0, 6.0, 10.0, 15.0}) CHECK(seam_residual(d, chi(), beta, lambda) < 1e-10);
}

TEST_CASE("exact expansion matches direct curvature of the glued metric") {
  const CornerData d = scaled_corner(2.0);
  const CutoffBeta beta = build_beta();
  for (double lambda : {2.0, 3.0, 5.0}) {
    const MetricField glued = hat_g(d, chi(), beta, lambda);
    const MetricField h = add_fields(glued, d.g, -1.0, "difference");
    for (const Point& b : d.boundary_samples(4, 12))
      for (double rho : {std::exp(-1.5 * lambda * lambda), std::exp(-lambda * lambda) * 2.0, 0.3, 0.7}) {
        const Point p = d.along_normal(b, rho);
        const double direct = scalar_curvature(glued, p);
        CHECK(std::abs(perturbed_scalar(d.g, h, p) - direct) < 1e-8 * std::abs(direct));
      }
  }
}

TEST_CASE("zero corner tensor") {
  const MetricField g = round_metric(kDim);
  const CornerData d = radial_corner(kDim, g, g, kHeight, 0.4, 1.2, "flat");
  const GlueReport r = verify_glued_lower_bound(d, chi(), build_beta(), 3.0, 1e-6);
  CHECK(r.outer_margin == 0.0);
  CHECK(r.inner_margin == 0.0);
  CHECK(r.pass);
  CHECK(find_lambda(d, 1e-9).lambda == 1.0);
}

TEST_CASE("lambda scaling of the glued curvature") {
  const CornerData d = scaled_corner(2.0);
  const LambdaScan scan = scan_lambda(d, 1.0, {2.0, 4.0, 8.0, 15.0});
  CHECK(std::abs(scan.inner_slope + 1.0) < 0.2);
  for (const GlueReport& r : scan.rows) {
    CHECK(r.inner_margin >= 0.0);
    CHECK(r.a_estimate == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(r.seam_residual < 1e-10);
  }
  // The outer structural remainder stays bounded as lambda doubles.
  CHECK(scan.rows[2].outer_structure < 1.5 * scan.rows[1].outer_structure);
  CHECK(scan.rows[3].outer_structure < 1.5 * scan.rows[2].outer_structure);
  // Outer losses shrink with lambda.
  CHECK(scan.rows[3].outer_margin > scan.rows[1].outer_margin);

  // A smaller epsilon never needs a smaller lambda.
  const double loose = find_lambda(d, 12.0).lambda;
  const double tight = find_lambda(d, 5.0).lambda;
  CHECK(loose <= tight);
  CHECK_THROWS_WITH_AS(find_lambda(d, 1.0), doctest::Contains("epsilon-unachievable-at-desk-scale"), Error);
}

TEST_CASE("normal ray dump") {
  const CornerData d = scaled_corner(2.0, 0.3, 0.6);
  const Point b = d.boundary_samples(1, 2)[0];
  const auto rows = normal_ray(d, 3.0, b, 40);
  REQUIRE(rows.size() == 40);
  CHECK(rows.front().branch == Branch::Tilde);
  CHECK(rows.back().branch == Branch::Base);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].rho > rows[i - 1].rho);
    CHECK(static_cast<int>(rows[i].branch) <= static_cast<int>(rows[i - 1].branch));
  }
  for (const RayRow& r : rows)
    if (r.branch == Branch::Tilde) CHECK(r.r_hat == r.r_gt);
}
