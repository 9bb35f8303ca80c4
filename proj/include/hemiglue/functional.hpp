#pragma once

// Integral quantities over the round hemisphere: the boundary-weighted total
// scalar curvature functional, induced equator areas, moment identities.

#include <vector>

#include "hemiglue/geometry.hpp"
#include "hemiglue/quadrature.hpp"

namespace hemi {

/// Area element of the chart unit sphere under g relative to the round one, at p with |p| = 1.
double area_density(const Mat& g, std::span<const double> p);
/// Area of the equator under g (rule must target the equator).
double induced_area(const MetricField& g, const QuadratureRule& equator, Exec exec = default_exec());

struct FunctionalValue {
  double volume_term = 0.0;  // int R_g f dvol_round
  double area_term = 0.0;    // 2 area(equator, g)
  double value = 0.0;
};
FunctionalValue functional_F(const MetricField& g, const QuadratureRule& hemisphere, const QuadratureRule& equator,
                             Exec exec = default_exec());

struct MomentRow {
  int alpha = 0;
  double lhs = 0.0;  // int x_n^alpha
  double rhs = 0.0;  // ((n+alpha)/(alpha+1)) int x_n^{alpha+2}
  double rel_error = 0.0;
};
struct MomentReport {
  std::vector<MomentRow> rows;
  double worst = 0.0;
  bool pass = false;
};
/// Checks the equator moment recursion for even alpha <= alpha_max (<= 20).
MomentReport moment_recursion_check(int n, int alpha_max, const QuadratureRule& equator, double tol = 1e-9);

/// <h, D^2 f> - tr(h) Lap f - (n-1) tr(h) f under the round metric at p.
double pointwise_identity(const MetricField& h, std::span<const double> p);

}  // namespace hemi
