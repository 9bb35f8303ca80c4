#pragma once

// Field types and chart-level Riemannian operations built on jets.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hemiglue/jet.hpp"
#include "hemiglue/tensor.hpp"

namespace hemi {

using Point = std::vector<double>;
using ScalarField = std::function<Jet(const JetVec&)>;
/// Chart map y -> Phi(y), evaluated on jets so it composes with anything downstream.
using ChartMap = std::function<JetVec(const JetVec&)>;
using DomainPredicate = std::function<bool(std::span<const double>)>;

struct VectorField {
  int dim = 0;
  std::function<JetVec(const JetVec&)> eval;
};

/// A metric (or, with definiteness waived, a symmetric 2-tensor field).
/// `input_order` is the coordinate-jet order the evaluator needs so that its
/// output carries second derivatives; fields built from Lie derivatives or
/// pullbacks need 3.
struct MetricField {
  int dim = 0;
  int input_order = 2;
  std::function<JetMatrix(const JetVec&)> eval;
  DomainPredicate domain;
  std::string name;

  JetMatrix at(std::span<const double> p) const;
};

/// Samples the field at p as order-2 numeric data. For metrics this also
/// enforces the domain and positive-definiteness invariants.
TensorJet sample_metric(const MetricField& g, std::span<const double> p);
TensorJet sample_tensor(const MetricField& h, std::span<const double> p);
/// Value only, evaluated with the lowest jet order the field accepts.
Mat metric_value(const MetricField& g, std::span<const double> p);

Connection christoffel(const MetricField& g, std::span<const double> p);
CurvatureData curvature_at(const MetricField& g, std::span<const double> p);
double scalar_curvature(const MetricField& g, std::span<const double> p);

/// (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k, evaluated on the
/// given coordinate jets (result has order one less; order 3 gives curvature-ready output).
JetMatrix lie_derivative_metric(const VectorField& x, const MetricField& g, const JetVec& coords);
MetricField lie_derivative_field(const VectorField& x, const MetricField& g);

HessianLaplacian hessian_laplacian(const ScalarField& u, const MetricField& g, std::span<const double> p);

/// (Phi^* g)_ij = d_i Phi^a g_ab(Phi) d_j Phi^b, given the jets of Phi.
JetMatrix pullback_metric(const JetVec& phi, const MetricField& g);
MetricField pullback_field(const ChartMap& phi, const MetricField& g, std::string name = "pullback");

double linearized_scalar(const MetricField& g, const MetricField& h, std::span<const double> p);
double perturbed_scalar(const MetricField& g, const MetricField& h, std::span<const double> p);

/// Pointwise sum g + c*h (no definiteness check until sampled as a metric).
MetricField add_fields(const MetricField& g, const MetricField& h, double c, std::string name = "sum");

/// Flow of a vector field.
struct FlowOptions {
  int initial_steps = 8;
  int max_steps = 4096;
  double tolerance = 1e-10;
  /// Chart region the trajectory must stay in.
  DomainPredicate domain;
};

struct FlowResult {
  JetVec map;                 // jets of Phi_t at the start point
  std::vector<double> point;  // Phi_t(p)
  Mat jacobian{};             // dPhi_t/dp
  int steps = 0;
};

/// RK4 flow of ydot = X(y) carried out in jet arithmetic, which integrates the
/// variational equations for all derivatives up to the jet order at once.
FlowResult flow(const VectorField& x, const JetVec& start, double t, const FlowOptions& opts = {});
FlowResult flow(const VectorField& x, std::span<const double> p, double t, int order = 1, const FlowOptions& opts = {});
ChartMap flow_map(const VectorField& x, double t, FlowOptions opts = {});

/// Embedded hypersurface given by local parametrizations.
struct Hypersurface {
  int dim = 0;  // ambient chart dimension
  /// Parametrization around a surface point p: params (dim-1 jets) -> chart jets, params = 0 -> p.
  std::function<JetVec(std::span<const double> p, const JetVec& params)> local_embedding;
  /// A chart vector pointing to the outward side at p.
  std::function<Point(std::span<const double> p)> outward;
};

/// Chart sphere {|y| = r}, outward = increasing |y|.
Hypersurface chart_sphere(int dim, double radius);

struct SurfaceGeometry {
  int k = 0;                           // surface dimension
  std::vector<Point> tangent;          // coordinate tangent vectors E_a
  Mat induced{};                       // g(E_a, E_b)
  Mat second_form{};                   // A(E_a, E_b) = -g(D_{E_a} E_b, nu)
  Mat second_form_frame{};             // A in the g-orthonormal frame
  std::vector<Point> frame;            // g-orthonormal frame (Gram-Schmidt, ascending)
  Point normal;                        // outward unit normal
  double mean_curvature = 0.0;         // trace of A
};

SurfaceGeometry surface_geometry(const MetricField& g, const Hypersurface& s, std::span<const double> p);
double mean_curvature(const MetricField& g, const Hypersurface& s, std::span<const double> p);

/// Euclidean orthonormal basis of the orthogonal complement of `v`
/// (Gram-Schmidt of the coordinate basis in ascending order).
std::vector<Point> orthonormal_complement(std::span<const double> v);

}  // namespace hemi
