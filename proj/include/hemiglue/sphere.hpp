#pragma once

// The round sphere in the stereographic chart from the south pole.
//
// The closed upper hemisphere is the closed unit ball |y| <= 1 of the chart,
// with
//   gbar_ij = 4 / (1 + |y|^2)^2 delta_ij,
//   x_i     = 2 y_i / (1 + |y|^2)          (i <= n),
//   f = x_{n+1} = (1 - |y|^2) / (1 + |y|^2),
// and the equator is the unit sphere |y| = 1.

#include <functional>

#include "hemiglue/geometry.hpp"

namespace hemi {

/// Ambient coordinates x_1..x_{n+1} as jets of the chart variables.
JetVec ambient_coordinates(const JetVec& y);
/// f = x_{n+1}.
Jet height(const JetVec& y);
/// Ambient point of a chart point.
Point to_ambient(std::span<const double> y);
/// Chart point of an ambient point on S^n (not the south pole).
Point to_chart(std::span<const double> x);

/// Conformal factor 4/(1+|y|^2)^2 as a jet.
Jet round_factor(const JetVec& y);

MetricField round_metric(int n, double scale = 1.0);
MetricField euclidean_metric(int n);
/// Ball model of hyperbolic space, 4/(1-|y|^2)^2 delta, |y| < 1.
MetricField hyperbolic_metric(int n);
/// phi * gbar for a scalar field phi.
MetricField conformal_round(int n, ScalarField factor, int input_order, std::string name);

/// Volume of the unit ball B^n and area of the unit sphere S^{n-1}.
double ball_volume(int n);
double sphere_area(int dim_of_sphere);

/// Laplacian and squared gradient on the equator S^{n-1} of a function of
/// u = x_n, given F'(u) and F''(u).
struct EquatorDerivatives {
  double laplacian = 0.0;
  double grad_sq = 0.0;
};
EquatorDerivatives equator_laplacian(double u, double dF, double d2F, int n);

/// Chart point on the equator with x_n = u and the remaining weight on y_1.
Point equator_point(int n, double u);

/// Random chart points, uniform in the chart ball of the given radius.
std::vector<Point> random_ball_points(int n, int count, double radius, unsigned seed);
/// Random points on the chart sphere of the given radius.
std::vector<Point> random_sphere_points(int n, int count, double radius, unsigned seed);

}  // namespace hemi
