#pragma once

// Gauss rules and product rules on the hemisphere (chart ball) and on the
// equator (chart unit sphere). Weights carry the round volume / area element.

#include <functional>
#include <iosfwd>
#include <vector>

#include "hemiglue/geometry.hpp"
#include "hemiglue/parallel.hpp"

namespace hemi {

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1] (Golub-Welsch).
GaussRule gauss_jacobi(int m, double alpha, double beta);
GaussRule gauss_legendre(int m);
/// Gauss-Legendre mapped to [a,b].
GaussRule gauss_legendre(int m, double a, double b);

/// Product rule on the unit sphere S^k in R^{k+1}; `m` Gauss nodes per polar
/// level and 2m equispaced azimuths.
struct SphereRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
};
SphereRule sphere_rule(int k, int m);

enum class QuadTarget { Hemisphere, Equator };

struct QuadratureRule {
  QuadTarget target = QuadTarget::Hemisphere;
  int n = 0;
  /// Polynomial exactness in the angular (or u) variable.
  int degree = 0;
  /// True if the rule only integrates functions invariant under rotations of
  /// the first n-1 chart coordinates (nodes lie in the y_1, y_n plane).
  bool symmetric = false;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  double integrate(const std::function<double(const Point&)>& fn, Exec exec = default_exec()) const;
  /// Weighted sum of precomputed node values.
  double sum(std::span<const double> values) const;
};

/// radial Gauss-Legendre points in the chart radius times an angular rule.
QuadratureRule hemisphere_rule(int n, int radial, int angular, bool symmetric);
QuadratureRule equator_rule(int n, int points, bool symmetric);

/// Rule exact to the given angular degree (<= 60), with a radial count
/// tied to it for the hemisphere.
QuadratureRule build_quadrature(int n, QuadTarget target, int degree, bool symmetric = true);

/// "x1,...,xn,weight" rows with 17 significant digits.
void write_csv(const QuadratureRule& rule, std::ostream& out);

}  // namespace hemi
