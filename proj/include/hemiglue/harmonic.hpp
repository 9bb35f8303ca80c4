#pragma once

// Galerkin eigenbases on the hemisphere for functions of (x_n, x_{n+1}),
// i.e. functions invariant under rotations of x_1..x_{n-1}.
//
// Two trial spaces are supported:
//   OddHarmonic: polynomials of degree <= L that are odd in x_{n+1}; the
//                Galerkin eigenvectors are the Dirichlet spherical harmonics.
//   Dirichlet:   every polynomial of degree <= L vanishing on the equator.
//                It also resolves data that does not vanish there.
// Both use the separated form  s^m C^{(n-2)/2}_m(x_n / s) * q(x_{n+1}),
// s^2 = 1 - x_{n+1}^2, where different m are orthogonal. For odd harmonics
// q = C^{m+(n-1)/2}_{l-m}; for the Dirichlet space q = x_{n+1} p_j with p_j
// orthonormal for the induced weight on [0,1] (discretized Stieltjes). The
// mass matrix then stays close to the identity.

#include <vector>

#include "hemiglue/geometry.hpp"
#include "hemiglue/quadrature.hpp"

namespace hemi {

enum class TrialSpace { OddHarmonic, Dirichlet };

struct Generator {
  int degree = 0;  // total polynomial degree
  int order = 0;   // m
  int index = 0;   // j, Dirichlet space only
  /// Normalizing factor (inverse hemisphere L2 norm).
  double scale = 1.0;
};

struct HarmonicElement {
  /// Harmonic degree l when the eigenvalue matches l(l+n-1), else -1.
  int degree = -1;
  double eigenvalue = 0.0;
  /// Coefficients over the generators.
  std::vector<double> coeffs;
};

class HarmonicBasis {
 public:
  int n = 0;
  int max_degree = 0;
  TrialSpace space = TrialSpace::OddHarmonic;
  std::vector<Generator> generators;
  std::vector<HarmonicElement> elements;
  /// Orthonormal recurrences in x_{n+1} per m (Dirichlet space): p_0 constant,
  /// p_{k+1} = ((x - a_k) p_k - b_k p_{k-1}) / b_{k+1}.
  std::vector<double> rec_p0;
  std::vector<std::vector<double>> rec_a, rec_b;
  double gram_condition = 0.0;
  /// max |eigenvalue - l(l+n-1)| / l(l+n-1) over elements with a degree.
  double eigenvalue_error = 0.0;

  std::size_t size() const noexcept { return elements.size(); }

  /// Generator values at ambient (x_n, x_{n+1}).
  std::vector<double> generator_values(double xn, double xf) const;
  /// Value of sum_k c_k * element_k at ambient (x_n, x_{n+1}).
  double evaluate(std::span<const double> element_coeffs, double xn, double xf) const;
  double evaluate_element(std::size_t k, double xn, double xf) const;
  /// (Lap + shift) applied to every element at ambient (x_n, x_{n+1}).
  std::vector<double> shifted_laplacian(double xn, double xf, double shift) const;
  /// Same, as jets of the chart coordinates.
  Jet evaluate(std::span<const double> element_coeffs, const JetVec& y) const;
  ScalarField field(std::vector<double> element_coeffs) const;
  ScalarField element_field(std::size_t k) const;
  /// Generator-space coefficients of a combination of elements.
  std::vector<double> generator_coeffs(std::span<const double> element_coeffs) const;
};

/// Builds the eigenbasis of -Laplacian over the trial space using the given
/// symmetric hemisphere rule; throws "basis-ill-conditioned" when the Gram
/// condition number exceeds 1e12.
HarmonicBasis build_harmonic_basis(int n, int max_degree, TrialSpace space = TrialSpace::OddHarmonic);
HarmonicBasis build_harmonic_basis(int n, int max_degree, TrialSpace space, const QuadratureRule& rule);

/// Default symmetric rule fine enough for products of degree-L polynomials.
QuadratureRule harmonic_rule(int n, int max_degree);

/// Number of odd-in-x_{n+1} invariant harmonics of degree exactly l.
int harmonic_multiplicity(int l);

/// max over points |Lap Y + l(l+n-1) Y| for one element (jet Laplacian).
double harmonic_residual(const HarmonicBasis& basis, std::size_t k, const std::vector<Point>& points);

}  // namespace hemi
