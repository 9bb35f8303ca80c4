#pragma once

// Assembly of the glued hemisphere metrics: the conformally bent collar near
// the equator, the Moebius shrink of the deformed metric onto a smaller cap,
// and the final glued metrics (round-collar variant and totally geodesic
// warped-product variant).

#include <string>
#include <vector>

#include "hemiglue/deformation.hpp"
#include "hemiglue/gluing.hpp"

namespace hemi {

/// (1 - exp(-1/(f - delta)))^(4/(n-2)) gbar, and exactly gbar for f <= delta
/// (where the flat factor is below double range, i.e. f - delta <= 1/700).
MetricField tilde_g_delta(int n, double delta);
/// Conformal factor of tilde_g_delta at height f.
double tilde_factor(int n, double delta, double f);

/// Random chart points with delta < f < 3 delta.
std::vector<Point> collar_points(int n, double delta, int count, unsigned seed);

struct SubharmonicReport {
  int samples = 0;
  double min_laplacian = 0.0;      // min of Lap exp(-1/(f-delta)) by jets
  double min_sufficient = 0.0;     // min of 1/(4 x^4) - n f / x^2, x = f - delta
  double max_formula_error = 0.0;  // relative gap to the closed form in f
  bool pass = false;
};
/// Throws "invalid-delta" unless 0 < delta < 1/8.
SubharmonicReport subharmonic_check(int n, double delta, int samples, unsigned seed);

struct RTildeReport {
  int samples = 0;
  int resolved = 0;                 // samples whose excess exceeds 1e-9 n(n-1)
  double min_excess = 0.0;          // min of the closed-form excess R - n(n-1); 0 once exp(-1/x) underflows
  double min_scaled_excess = 0.0;   // min of the excess times exp(1/x), x = f - delta
  double min_resolved_excess = 0.0; // min of direct R - n(n-1) over resolved samples
  double max_relative_error = 0.0;  // direct R against the conformal formula
  bool pass = false;
};
RTildeReport r_tilde_check(int n, double delta, int samples, unsigned seed);

/// tau = -2 delta / (1 + sqrt(1 - 4 delta^2)).
double tau_for_delta(double delta);
/// The Moebius map on ambient points of S^n. Throws "invalid-tau" unless |tau| < 1.
Point psi_tau(double tau, std::span<const double> x);
/// In the stereographic chart the map is the dilation y -> k y with this k.
double psi_dilation(double tau);
ChartMap psi_tau_chart(double tau);

/// (1 - e^{-1/delta})^{4/(n-2)} (1 - 4 delta^2).
double g_delta_scale(int n, double delta);
/// Scaled pullback of g under the Moebius map; defined on {f >= 2 delta}.
MetricField g_delta(const MetricField& g, int n, double delta);

struct DeltaRow {
  double delta = 0.0, tau = 0.0;
  double h_tilde_sup = 0.0;  // sup over the boundary of H of tilde_g_delta
  double h_g_inf = 0.0;      // inf over the boundary of H of g_delta
  double gap = 0.0;
  double r_min = 0.0;        // min R of g_delta over cap samples
  bool pass = false;
};
struct DeltaChoice {
  double delta = 0.0;
  std::vector<DeltaRow> table;
};
/// Mean-curvature gap on {f = 2 delta} and min R of g_delta on the cap.
DeltaRow evaluate_delta(const DeformationResult& def, double delta, int boundary_samples = 32, unsigned seed = 5);
/// Scans delta_max 2^-k and accepts the largest delta with a positive
/// mean-curvature gap and R(g_delta) > n(n-1). Throws "delta-selection-failed".
DeltaChoice choose_delta(const DeformationResult& def, double delta_max = 0.1, int boundary_samples = 32,
                         int max_halvings = 24, unsigned seed = 5);

struct FinalCheck {
  int samples = 0;
  int gluing_samples = 0;
  int strict = 0;               // samples with R - n(n-1) > tolerance
  double min_excess = 0.0;
  double max_excess = 0.0;
  double tolerance = 1e-9;
  int round_samples = 0;
  double round_error = 0.0;     // max |g_final - gbar| on the round region
  double boundary_form = 0.0;   // max |A| on the equator (totally geodesic variant)
  bool pass = false;
};

struct GluedResult {
  std::string target;
  int n = 0;
  double t = 0.0;
  double delta = 0.0, tau = 0.0;
  double kappa = 0.0, width = 0.0, collar = 0.0;
  double lambda = 0.0, epsilon = 0.0;
  double min_input_excess = 0.0;  // over the gluing region
  bool gluing_pass = false;
  DeltaChoice delta_choice;
  CornerReport corner;
  LambdaScan scan;
  FinalCheck final_check;
  CornerData data;
  MetricField metric;
  bool pass = false;
};

struct ThmCOptions {
  double delta_max = 0.1;
  int boundary_samples = 32;
  double epsilon = 0.0;  // 0: half the minimum input excess over the gluing region
  SamplePlan plan;
  int final_samples = 2000;
  unsigned seed = 1;
};
GluedResult build_thm_c(const DeformationResult& def, const ThmCOptions& opts = {});

/// Warped-product collar ds^2 + phi(s)^2 (round S^{n-1}) in s = asin f,
/// phi = cos(s) (1 - kappa s^2 exp(-s^2 / width)).
struct CollarParams {
  double kappa = 0.05;
  double width = 0.16;
  double collar = 0.15;  // gluing collar {s < collar}
};
struct WarpValue {
  double phi = 0.0, d1 = 0.0, d2 = 0.0;
};
WarpValue collar_warp(const CollarParams& p, double s);
/// -2(n-1) phi''/phi + (n-1)(n-2)(1 - phi'^2)/phi^2.
double warped_scalar(int n, const WarpValue& w);
MetricField collar_metric(int n, const CollarParams& p);

struct CorollaryOptions {
  CollarParams collar;
  double epsilon = 0.0;
  SamplePlan plan;
  int final_samples = 2000;
  int boundary_samples = 50;
  unsigned seed = 1;
};
GluedResult build_corollary(const DeformationResult& def, const CorollaryOptions& opts = {});

}  // namespace hemi
