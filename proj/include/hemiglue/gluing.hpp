#pragma once

// Interpolating between a metric g on a region M and a metric gt that agrees
// with g on the boundary and has smaller boundary mean curvature, so that
// the scalar curvature drops by at most epsilon.
//
// With N = gt - g = rho T near the boundary (rho the boundary defining
// function, positive inside M) the interpolation is
//   g + lambda^-1 chi(lambda rho) T              for rho >= exp(-lambda^2),
//   gt - lambda rho^2 beta(log(rho) / lambda^2) T  for rho <  exp(-lambda^2).
// The outer branch is evaluated as g + (chi(s)/s) zeta N with s = lambda rho,
// which needs no division by rho. The inner branch uses T at the boundary
// foot point, extracted from second-order jets of N.

#include <functional>
#include <string>
#include <vector>

#include "hemiglue/cutoff.hpp"
#include "hemiglue/geometry.hpp"

namespace hemi {

struct CornerData {
  int n = 0;
  MetricField g;   // metric on M
  MetricField gt;  // metric near the boundary
  ScalarField rho;
  /// Value of rho without jets (rho may be singular far from the boundary).
  std::function<double(std::span<const double>)> rho_value;
  /// Largest rho reached inside M.
  double rho_max = 0.0;
  /// zeta: 1 near the boundary, 0 for rho >= cut_end (T = zeta N / rho).
  ScalarField cut;
  double cut_start = 0.0;
  double cut_end = 0.0;
  Hypersurface boundary;
  /// Boundary point whose normal ray passes through p.
  std::function<Point(std::span<const double> p)> foot;
  /// Point at defining-function value rho on the normal ray through boundary point b.
  std::function<Point(std::span<const double> b, double rho)> along_normal;
  std::function<std::vector<Point>(int count, unsigned seed)> boundary_samples;
  std::function<std::vector<Point>(int count, unsigned seed)> interior_samples;
  std::string label;
};

/// Boundary on the chart sphere f = boundary_height with M = {f >= boundary_height},
/// rho = asin f - asin(boundary_height), and zeta switching off between
/// rho = cut_start and rho = cut_end.
CornerData radial_corner(int n, MetricField g, MetricField gt, double boundary_height, double cut_start, double cut_end,
                         std::string label);

/// Value and first derivatives of T at a boundary point.
struct FootTensor {
  Point base;
  Mat value{};
  std::array<Mat, kMaxDim> grad{};
};
FootTensor foot_tensor(const CornerData& data, std::span<const double> b);
/// Value of T = zeta (gt - g) / rho at p; near the boundary via the foot point.
Mat corner_tensor(const CornerData& data, std::span<const double> p);

struct CornerReport {
  int samples = 0;
  double boundary_mismatch = 0.0;  // max |gt - g| on the boundary
  double rho_value = 0.0;          // max |rho| on the boundary
  double grad_rho_error = 0.0;     // max ||grad rho|_g - 1|
  double min_trace = 0.0;          // min tr(T restricted to the boundary)
  double min_gap = 0.0;            // min H_g - H_gt
  double gap_residual = 0.0;       // max |H_g - H_gt - tr(T|bdry)/2|
  double second_form_residual = 0.0;  // max |A_gt - A_g + T/2| on tangent pairs
  double a_estimate = 0.0;         // min |grad rho|^2 tr T - T(grad rho, grad rho) under g
  double identity_residual = 0.0;  // max |g + rho T - gt| at interior points with zeta = 1
};
CornerReport check_corner(const CornerData& data, int samples, unsigned seed);

/// Validates the data: "corner-mismatch" when g != gt on the boundary beyond
/// 1e-10, "mean-curvature-gap-violated" when H_g <= H_gt somewhere.
CornerReport validate_corner(const CornerData& data, int samples = 24, unsigned seed = 7);

enum class Branch { Base, Outer, Inner, Tilde };
const char* branch_name(Branch b);

constexpr double kMaxLambda = 15.0;

/// The interpolated metric. Shells too thin to be represented by chart
/// points are sampled at a boundary point with rho_shift > 0 standing in for
/// rho; such fields are only meaningful at boundary points.
MetricField hat_g(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                  double rho_shift = 0.0);
/// Formula of a single branch, for seam comparisons.
MetricField hat_g_branch(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda, Branch b,
                         double rho_shift = 0.0);
/// g + rho T with rho's value set to rho_shift and T from the foot point: the comparison metric for
/// shifted samples.
MetricField shifted_tilde(const CornerData& data, double rho_shift);
Branch branch_at(const CornerData& data, double lambda, std::span<const double> p, double rho_shift = 0.0);

struct SamplePlan {
  int boundary_points = 16;
  int outer_shells = 32;  // log-spaced rho in [exp(-lambda^2), outer_max]
  int inner_shells = 12;  // equispaced log rho in [-2 lambda^2, -lambda^2]
  int collar_shells = 32;    // linearly spaced rho in (0, outer_max)
  int interior_points = 64;  // random points of M
  double outer_max = 0.0; // defaults to 1.5 cut_end
  unsigned seed = 3;
};

/// A gluing sample: chart point plus the rho shift it is evaluated with.
struct GlueSample {
  Point point;
  double shift = 0.0;
  double rho = 0.0;
  bool inner = false;
};
std::vector<GlueSample> glue_samples(const CornerData& data, double lambda, const SamplePlan& plan);

struct GlueReport {
  double lambda = 0.0;
  double epsilon = 0.0;
  double outer_margin = 0.0;  // min over outer samples of R_hat - R_g
  double inner_margin = 0.0;  // min over inner samples of R_hat - R_gt
  double bound_margin = 0.0;  // min over all samples of R_hat - min(R_g, R_gt)
  double inner_deficit = 0.0; // max over inner samples |R_hat - R_gt - 2 lambda beta a|
  double outer_structure = 0.0; // max over outer samples |R_hat - R_g + lambda chi''(lambda rho) a|
  double a_estimate = 0.0;
  double seam_residual = 0.0;
  int samples = 0;
  bool pass = false;
};
GlueReport verify_glued_lower_bound(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                                    double epsilon, const SamplePlan& plan = {});

/// Max difference of order-2 jets between the two branch formulas on the
/// seam band where both apply.
double seam_residual(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                     const SamplePlan& plan = {});

struct LambdaScan {
  std::vector<GlueReport> rows;
  double lambda = 0.0;  // smallest passing value, 0 if none
  double inner_slope = 0.0;  // log-log slope of inner_deficit against lambda
};
LambdaScan scan_lambda(const CornerData& data, double epsilon, const std::vector<double>& lambdas,
                       const SamplePlan& plan = {});
/// Smallest integer lambda in [1, 15] that passes; throws
/// "epsilon-unachievable-at-desk-scale" with the margin table otherwise.
LambdaScan find_lambda(const CornerData& data, double epsilon, const SamplePlan& plan = {});

/// Normal-ray dump (rho, R_hat, R_g, R_gt, branch) for plotting.
struct RayRow {
  double rho = 0.0, r_hat = 0.0, r_g = 0.0, r_gt = 0.0;
  Branch branch = Branch::Base;
};
std::vector<RayRow> normal_ray(const CornerData& data, double lambda, std::span<const double> b, int count);

}  // namespace hemi
