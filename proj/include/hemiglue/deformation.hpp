#pragma once

// Second-order deformation of the round hemisphere that raises scalar
// curvature in the interior while keeping the metric fixed on the equator
// and making the equator mean-convex.

#include <array>
#include <span>
#include <vector>

#include "hemiglue/geometry.hpp"
#include "hemiglue/harmonic.hpp"
#include "hemiglue/quadrature.hpp"

namespace hemi {

/// Even sextic psi(u) = sum_k coeffs[k] u^{2k}.
struct EvenSextic {
  std::array<double, 4> coeffs{};
  double value(double u) const noexcept;
  double d1(double u) const noexcept;
  double d2(double u) const noexcept;
  Jet of(const Jet& u) const;
};

/// The boundary profile polynomial for dimension n (n >= 3).
EvenSextic build_psi(int n);
/// Coefficient K in  Lap_S psi + (n-1) psi = -K u^6.
double psi_identity_coefficient(int n);

struct PsiIdentityReport {
  double coefficient = 0.0;
  double max_residual = 0.0;
  int samples = 0;
};
PsiIdentityReport check_psi_identity(int n, int samples);

struct EtaSpec {
  int n = 0;
  double c = 0.0;
  EvenSextic psi;
  // Integrals over the equator.
  double p0 = 0.0;        // int |grad psi|^2 - (n-1) psi^2
  double psi_integral = 0.0;
  double area = 0.0;
  double threshold = 0.0; // smallest positive root of the quadratic in c
  double quadratic = 0.0; // int |grad eta|^2 - (n-1) eta^2 at the chosen c
  double max_operator = 0.0; // max over samples of Lap_S eta + (n-1) eta (< 0)

  double eta(double u) const noexcept { return psi.value(u) - c; }
  /// P(c') = p0 + 2(n-1) c' S - (n-1) c'^2 A.
  double quadratic_at(double cc) const noexcept;
};

/// Picks c as half the positivity threshold of the quadratic.
EtaSpec choose_c(int n, const QuadratureRule& equator);
EtaSpec choose_c(int n);

/// X = f grad(eta^) - eta^ grad f with eta^ = psi(x_n) - c, gradients under the round metric.
VectorField build_X(const EtaSpec& spec);

struct BoundaryFieldCheck {
  double normal_residual = 0.0;     // |X - eta nu|
  double derivative_residual = 0.0; // |D_nu X + grad_S eta|
  double lie_residual = 0.0;        // max |L_X gbar|
};
BoundaryFieldCheck check_X_on_equator(const EtaSpec& spec, std::span<const double> p);

MetricField family_g0(const EtaSpec& spec, double t);
MetricField family_g1(const EtaSpec& spec, double t, const FlowOptions& opts = {});

/// Round metric and L_X gbar sampled once at a point; R along gbar + t L_X gbar.
struct GaugeSample {
  TensorJet round;
  TensorJet lie;
  double scalar_at(double t) const;
};
GaugeSample gauge_sample(const VectorField& x, std::span<const double> p);

struct QValue {
  double second = 0.0;  // Q
  double first = 0.0;   // first t-derivative (should vanish)
};
/// Five-point central differences in t with one Richardson step.
QValue compute_Q(const GaugeSample& s, double step = 0.0025);
QValue compute_Q(const EtaSpec& spec, std::span<const double> p, double step = 0.0025);

struct MuResult {
  double mu = 0.0;
  double qf_integral = 0.0;
  double f_integral = 0.0;
  double orthogonality = 0.0;  // |int (Q - mu) f|
  double q_sup = 0.0;
  double max_first = 0.0;
  double q_step = 0.0025;
  std::vector<double> q_nodes;
};
MuResult compute_mu(const EtaSpec& spec, const QuadratureRule& hemisphere, double step = 0.0025);

struct USolution {
  HarmonicBasis basis;
  std::vector<double> coeffs;  // over basis elements
  double f_mode = 0.0;         // |int (Q - mu) Y_1|
  double q_sup = 0.0;
  ScalarField field;
};
/// Solves Lap u + n u = Q - mu over the basis (u = 0 on the equator) by
/// weighted least squares on the rule nodes, excluding the f mode, followed by
/// `uniform_steps` Lawson reweightings towards the best uniform fit.
/// The rule must be the one mu was computed on.
USolution solve_u(const EtaSpec& spec, const MuResult& mu, HarmonicBasis basis, const QuadratureRule& hemisphere,
                  int uniform_steps = 40);

/// Chart points on a polar x azimuthal grid over the (x_n, f) half disc.
/// Fields invariant under rotations fixing x_n and f are resolved by it.
std::vector<Point> zonal_grid(int n, int polar, int azimuthal);

/// Five independent evaluations of the same second variation; they agree
/// when X is built correctly.
struct EnergyChain {
  double functional_g0 = 0.0;  // d^2/dt^2 F(g0(t)) at 0
  double qf_integral = 0.0;    // int Q f
  double functional_g1 = 0.0;  // d^2/dt^2 F(g1(t)) at 0
  double area_flow = 0.0;      // 2 d^2/dt^2 area(phi_t(equator)) at 0
  double boundary_form = 0.0;  // 2 P(c)
  double spread = 0.0;         // max pairwise relative difference
};
EnergyChain energy_chain(const EtaSpec& spec, const MuResult& mu, const QuadratureRule& hemisphere,
                         const QuadratureRule& equator, double step = 0.01);

/// max over points |Lap u + n u - (Q - mu)|.
double pde_residual(const EtaSpec& spec, const USolution& u, double mu, const std::vector<Point>& points);

MetricField family_g(const EtaSpec& spec, const ScalarField& u, double t);

struct Margins {
  double t = 0.0;
  double r_margin = 0.0;        // min over samples of R - n(n-1)
  double h_margin = 0.0;        // min over equator samples of H
  double boundary_match = 0.0;  // max over equator samples of |g - gbar|
  bool pass = false;
};
Margins deformation_margins(const EtaSpec& spec, const ScalarField& u, double t, const std::vector<Point>& interior,
                            const std::vector<Point>& equator);

struct DeformationOptions {
  int basis_degree = 16;
  int interior_samples = 2000;
  int equator_samples = 200;
  unsigned seed = 1;
  double t_start = 0.2;
  int t_steps = 11;
  double q_step = 0.0025;
  int uniform_steps = 40;
  int zonal_polar = 24;  // zonal grid added to the interior margin samples
  int zonal_azimuthal = 48;
};

struct DeformationResult {
  EtaSpec spec;
  MuResult mu;
  USolution u;
  double t = 0.0;
  Margins accepted;
  std::vector<Margins> scan;
  double r_slope = 0.0;  // log-log slope of the R margin against t
  double h_slope = 0.0;
  std::array<double, 2> slope_t{};  // the two t values the slopes come from
  int interior_count = 0;           // random plus zonal interior samples
  MetricField metric;
};

/// Sample points used for the margins: random interior ball points with a
/// share on shells close to the equator, plus random equator points.
std::vector<Point> interior_samples(int n, int count, unsigned seed);
std::vector<Point> equator_samples(int n, int count, unsigned seed);

/// Interior points for the R margin: random interior samples plus the zonal grid.
std::vector<Point> margin_samples(int n, const DeformationOptions& opts);

/// Runs the whole construction and picks the largest passing t on the grid
/// t_start * 2^-k. Throws "deformation-failed" if none passes.
DeformationResult build_deformation(int n, const DeformationOptions& opts = {});

}  // namespace hemi
