#include "hemiglue/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "hemiglue/error.hpp"
#include "hemiglue/functional.hpp"
#include "hemiglue/parallel.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

using json = nlohmann::ordered_json;

namespace {

constexpr double kRoundExactTol = 1e-14;
constexpr double kSlopeTol = 0.1;
constexpr double kInnerSlopeTol = 0.2;

double round_scalar(int n) { return n * (n - 1.0); }

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Symmetric tensor field with entries a + b.y + y^T C y, coefficients uniform in [-scale, scale].
MetricField random_quadratic_tensor(int n, unsigned seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  const int terms = 1 + n + n * (n + 1) / 2;
  std::vector<double> coef(static_cast<std::size_t>(n * n * terms));
  for (double& v : coef) v = u(rng);
  MetricField h;
  h.dim = n;
  h.name = "random-quadratic";
  h.eval = [n, terms, coef](const JetVec& y) {
    JetMatrix m(n, y[0].dim(), y[0].order());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double* c = &coef[static_cast<std::size_t>((i * n + j) * terms)];
        Jet e(y[0].dim(), y[0].order(), c[0]);
        int t = 1;
        for (int a = 0; a < n; ++a) e += c[t++] * y[a];
        for (int a = 0; a < n; ++a)
          for (int b = a; b < n; ++b) e += c[t++] * (y[a] * y[b]);
        m.set(i, j, e);
      }
    return m;
  };
  return h;
}

// Largest gbar-norm of h over the nodes: |h|_gbar = |h|_F / conformal factor.
double round_norm(const MetricField& h, const std::vector<Point>& nodes, int n) {
  double norm = 0.0;
  for (const Point& p : nodes) {
    const Mat v = metric_value(h, p);
    double r2 = 0.0;
    for (double c : p) r2 += c * c;
    const double inv = (1.0 + r2) * (1.0 + r2) / 4.0;
    double fro = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) fro += v[i][j] * v[i][j];
    norm = std::max(norm, inv * std::sqrt(fro));
  }
  return norm;
}

json corner_json(const CornerReport& c) {
  json j;
  j["samples"] = c.samples;
  j["boundary_mismatch"] = c.boundary_mismatch;
  j["rho_value"] = c.rho_value;
  j["grad_rho_error"] = c.grad_rho_error;
  j["min_trace"] = c.min_trace;
  j["min_gap"] = c.min_gap;
  j["gap_residual"] = c.gap_residual;
  j["second_form_residual"] = c.second_form_residual;
  j["a_estimate"] = c.a_estimate;
  j["identity_residual"] = c.identity_residual;
  return j;
}

json glue_row_json(const GlueReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["epsilon"] = r.epsilon;
  j["outer_margin"] = r.outer_margin;
  j["inner_margin"] = r.inner_margin;
  j["bound_margin"] = r.bound_margin;
  j["inner_deficit"] = r.inner_deficit;
  j["outer_structure"] = r.outer_structure;
  j["a_estimate"] = r.a_estimate;
  j["seam_residual"] = r.seam_residual;
  j["samples"] = r.samples;
  j["pass"] = r.pass;
  return j;
}

json margins_json(const Margins& m) {
  json j;
  j["t"] = m.t;
  j["r_margin"] = m.r_margin;
  j["h_margin"] = m.h_margin;
  j["boundary_match"] = m.boundary_match;
  j["pass"] = m.pass;
  return j;
}

json delta_row_json(const DeltaRow& r) {
  json j;
  j["delta"] = r.delta;
  j["tau"] = r.tau;
  j["h_tilde_sup"] = r.h_tilde_sup;
  j["h_g_inf"] = r.h_g_inf;
  j["gap"] = r.gap;
  j["r_min"] = r.r_min;
  j["pass"] = r.pass;
  return j;
}

json final_json(const FinalCheck& f) {
  json j;
  j["samples"] = f.samples;
  j["gluing_samples"] = f.gluing_samples;
  j["strict"] = f.strict;
  j["min_excess"] = f.min_excess;
  j["max_excess"] = f.max_excess;
  j["tolerance"] = f.tolerance;
  j["round_samples"] = f.round_samples;
  j["round_error"] = f.round_error;
  j["boundary_form"] = f.boundary_form;
  j["pass"] = f.pass;
  return j;
}

double slope(double t0, double m0, double t1, double m1) { return std::log(m0 / m1) / std::log(t0 / t1); }

// Minimum of R - n(n-1) of the warped collar on [0, collar].
double collar_min_excess(int n, const CollarParams& p) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i) m = std::min(m, warped_scalar(n, collar_warp(p, p.collar * i / 400.0)) - round_scalar(n));
  return m;
}

// ------------------------------------------------------------------ suites

void engine_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const int count = cfg.integer("engine_samples");
  const double tol = cfg.number("tol_engine");

  const MetricField round = round_metric(n);
  const auto pts = random_ball_points(n, count, 1.0, ctx.seed() + 100);
  const auto round_err = index_map(pts.size(), [&](std::size_t i) {
    return std::abs(scalar_curvature(round, pts[i]) - round_scalar(n));
  });
  rep.checks.push_back(check_below("round-scalar", max_of(round_err), tol, count, "max |R - n(n-1)|"));

  const MetricField hyper = hyperbolic_metric(n);
  const auto hpts = random_ball_points(n, count, 0.9, ctx.seed() + 101);
  const auto hyper_err = index_map(hpts.size(), [&](std::size_t i) {
    return std::abs(scalar_curvature(hyper, hpts[i]) + round_scalar(n));
  });
  rep.checks.push_back(check_below("hyperbolic-scalar", max_of(hyper_err), tol, count, "max |R + n(n-1)|"));

  // Geodesic spheres about the chart origin: radius s sits at |y| = tan(s/2), H = (n-1) cot s.
  const std::vector<double> radii{0.3, 0.6, 0.9, 1.2, 1.5};
  double sphere_err = 0.0;
  int sphere_samples = 0;
  for (double s : radii) {
    const double r = std::tan(0.5 * s);
    const Hypersurface surf = chart_sphere(n, r);
    for (const Point& p : random_sphere_points(n, 4, r, ctx.seed() + 102)) {
      sphere_err = std::max(sphere_err, std::abs(mean_curvature(round, surf, p) - (n - 1) / std::tan(s)));
      ++sphere_samples;
    }
  }
  rep.checks.push_back(check_below("geodesic-sphere-mean-curvature", sphere_err, cfg.number("tol_sphere"),
                                   sphere_samples, "max |H - (n-1) cot s| over 5 radii"));

  // Exact expansion of R(g + h) against direct curvature. Each sample rescales a random
  // quadratic tensor so that |h|_gbar at its point is uniform in (0, 1/2].
  const int pcount = cfg.integer("perturb_samples");
  const auto ppts = random_ball_points(n, pcount, 1.0, ctx.seed() + 103);
  const auto rel = index_map(ppts.size(), [&](std::size_t i) {
    const unsigned s = ctx.seed() + 1000 + static_cast<unsigned>(i);
    const MetricField raw = random_quadratic_tensor(n, s, 1.0);
    const Mat v = metric_value(raw, ppts[i]);
    double fro = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) fro += v[a][b] * v[a][b];
    std::mt19937_64 rng(s);
    const double size = 0.5 * (1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    const double scale = size / std::sqrt(fro);
    // h = scale * round factor * raw, so |h|_gbar = scale * |raw|_F at the sample.
    MetricField h = raw;
    h.eval = [raw, scale](const JetVec& y) { return (scale * round_factor(y)) * raw.eval(y); };
    const double direct = scalar_curvature(add_fields(round, h, 1.0), ppts[i]);
    return std::abs(perturbed_scalar(round, h, ppts[i]) - direct) / std::max(std::abs(direct), 1e-300);
  });
  rep.checks.push_back(check_below("perturbed-scalar", max_of(rel), cfg.number("tol_perturb"), pcount,
                                   "max relative gap between the exact expansion and direct R(g + h)"));
  rep.results["engine"] = json{{"round_error", max_of(round_err)},
                               {"hyperbolic_error", max_of(hyper_err)},
                               {"sphere_error", sphere_err},
                               {"perturbed_relative_error", max_of(rel)}};
}

void eta_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const PsiIdentityReport id = check_psi_identity(n, 401);
  rep.checks.push_back(check_below("profile-identity", id.max_residual, cfg.number("tol_identity"), id.samples));

  const EtaSpec spec = choose_c(n);
  if (n == 3) {
    const double exact = 20096.0 * std::numbers::pi / 45045.0;
    rep.checks.push_back(check_below("boundary-integral-p0", std::abs(spec.p0 - exact) / exact, 1e-9, 1,
                                     "relative error against the closed form for n = 3"));
  }
  rep.checks.push_back(check_above("p0-positive", spec.p0, 0.0, 1));
  rep.checks.push_back(check_flag("c-below-threshold", spec.c > 0.0 && spec.c < spec.threshold, 1,
                                  "c = " + fmt(spec.c) + ", threshold = " + fmt(spec.threshold)));
  rep.checks.push_back(check_above("boundary-quadratic", spec.quadratic, 0.0, 1, "P(c)"));
  rep.checks.push_back(check_below("eta-operator", spec.max_operator, 0.0, 1, "max of Lap eta + (n-1) eta"));

  const auto eq = equator_samples(n, cfg.integer("equator_samples"), ctx.seed() + 1);
  const auto fc = index_map(eq.size(), [&](std::size_t i) { return check_X_on_equator(spec, eq[i]); });
  double normal = 0.0, deriv = 0.0, lie = 0.0;
  for (const BoundaryFieldCheck& c : fc) {
    normal = std::max(normal, c.normal_residual);
    deriv = std::max(deriv, c.derivative_residual);
    lie = std::max(lie, c.lie_residual);
  }
  const double tol = cfg.number("tol_field");
  const int m = static_cast<int>(eq.size());
  rep.checks.push_back(check_below("field-normal", normal, tol, m, "max |X - eta nu| on the equator"));
  rep.checks.push_back(check_below("field-derivative", deriv, tol, m, "max |D_nu X + grad eta| on the equator"));
  rep.checks.push_back(check_below("field-killing", lie, tol, m, "max |L_X gbar| on the equator"));
  rep.results["eta"] = json{{"c", spec.c},           {"p0", spec.p0},
                            {"threshold", spec.threshold}, {"quadratic", spec.quadratic},
                            {"psi_integral", spec.psi_integral}, {"max_operator", spec.max_operator}};
}

void variation_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const MetricField round = round_metric(n);

  const FunctionalValue f0 = functional_F(round, hemisphere_rule(n, 32, 10, true), equator_rule(n, 16, true));
  const double exact = round_scalar(n) * ball_volume(n) + 2.0 * sphere_area(n - 1);
  rep.checks.push_back(check_below("functional-round", std::abs(f0.value - exact) / exact, 1e-8, 1,
                                   "relative error of F(gbar)"));

  const QuadratureRule hemi_rule = hemisphere_rule(n, 24, 14, false);
  const QuadratureRule eq_rule = equator_rule(n, 20, false);
  const int dirs = cfg.integer("variation_samples");
  double worst = -std::numeric_limits<double>::infinity();
  double worst_ratio = 0.0;
  constexpr double kStep = 1e-4;
  for (int k = 0; k < dirs; ++k) {
    const MetricField h = random_quadratic_tensor(n, ctx.seed() + 200 + static_cast<unsigned>(k), 0.3);
    const double norm = round_norm(h, hemi_rule.nodes, n);
    const double d = (functional_F(add_fields(round, h, kStep), hemi_rule, eq_rule).value -
                      functional_F(add_fields(round, h, -kStep), hemi_rule, eq_rule).value) /
                     (2.0 * kStep);
    const double ratio = std::abs(d) / norm;
    if (ratio > worst_ratio) worst_ratio = ratio;
    worst = std::max(worst, std::abs(d));
  }
  rep.checks.push_back(check_below("first-variation", worst_ratio, cfg.number("tol_fd"), dirs,
                                   "max |dF(gbar + t h)/dt| / |h| at t = 0"));

  const EtaSpec spec = choose_c(n);
  const QuadratureRule rule = harmonic_rule(n, cfg.integer("basis_degree"));
  const MuResult mu = compute_mu(spec, rule, cfg.number("q_step"));
  rep.checks.push_back(check_above("qf-integral", mu.qf_integral, 0.0, static_cast<int>(rule.nodes.size())));
  rep.checks.push_back(check_below("mu-orthogonality", mu.orthogonality, 1e-9 * mu.q_sup,
                                   static_cast<int>(rule.nodes.size()), "|int (Q - mu) f|"));
  const EnergyChain chain =
      energy_chain(spec, mu, build_quadrature(n, QuadTarget::Hemisphere, cfg.integer("hemisphere_degree")),
                   build_quadrature(n, QuadTarget::Equator, cfg.integer("equator_degree")));
  rep.checks.push_back(check_below("second-variation-chain", chain.spread, cfg.number("tol_chain"), 5,
                                   "max pairwise relative spread of five evaluations"));
  rep.results["variation"] = json{{"functional_round", f0.value},
                                  {"functional_exact", exact},
                                  {"first_variation_max", worst},
                                  {"mu", mu.mu},
                                  {"qf_integral", mu.qf_integral},
                                  {"chain",
                                   json{{"functional_g0", chain.functional_g0},
                                        {"qf_integral", chain.qf_integral},
                                        {"functional_g1", chain.functional_g1},
                                        {"area_flow", chain.area_flow},
                                        {"boundary_form", chain.boundary_form},
                                        {"spread", chain.spread}}}};
}

void deformation_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const DeformationResult& def = ctx.deformation();
  const auto pts = interior_samples(n, cfg.integer("interior_samples"), ctx.seed() + 3);
  const double res = pde_residual(def.spec, def.u, def.mu.mu, pts) / def.mu.q_sup;
  rep.checks.push_back(check_below("correction-pde-residual", res, cfg.number("tol_pde"), static_cast<int>(pts.size()),
                                   "max |Lap u + n u - (Q - mu)| / max |Q|"));
  rep.checks.push_back(check_below("correction-f-mode", def.u.f_mode, 1e-6 * def.mu.q_sup, 1, "|int (Q - mu) f|"));
  const auto eq = equator_samples(n, cfg.integer("equator_samples"), ctx.seed() + 1);
  double ub = 0.0;
  for (const Point& p : eq) ub = std::max(ub, std::abs(def.u.field(coordinate_jets(p, 0)).value()));
  rep.checks.push_back(check_below("correction-boundary", ub, cfg.number("tol_boundary"), static_cast<int>(eq.size()),
                                   "max |u| on the equator"));

  const Margins& a = def.accepted;
  rep.checks.push_back(check_above("scalar-margin", a.r_margin, 0.0, def.interior_count,
                                   "min R - n(n-1) at t = " + fmt(def.t)));
  rep.checks.push_back(check_above("mean-curvature-margin", a.h_margin, 0.0, cfg.integer("equator_samples"),
                                   "min H on the equator"));
  rep.checks.push_back(check_below("boundary-metric-match", a.boundary_match, cfg.number("tol_boundary"),
                                   cfg.integer("equator_samples"), "max |g - gbar| on the equator"));
  const std::string slope_at = "log-log slope between t = " + fmt(def.slope_t[0]) + " and " + fmt(def.slope_t[1]);
  rep.checks.push_back(check_near("scalar-margin-slope", def.r_slope, 2.0, kSlopeTol, 2, slope_at));
  rep.checks.push_back(check_near("mean-curvature-slope", def.h_slope, 1.0, kSlopeTol, 2, slope_at));
  rep.results["deformation"] = deformation_json(def, ctx.deformation_options());
}

void gluing_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const GluedResult& r = ctx.thm_c();
  rep.checks.push_back(check_below("corner-boundary-match", r.corner.boundary_mismatch, cfg.number("tol_boundary"),
                                   r.corner.samples));
  rep.checks.push_back(check_above("corner-mean-curvature-gap", r.corner.min_gap, 0.0, r.corner.samples));
  double seam = 0.0;
  int samples = 0;
  for (const GlueReport& g : r.scan.rows) {
    seam = std::max(seam, g.seam_residual);
    samples = std::max(samples, g.samples);
  }
  std::string det = "epsilon = " + fmt(r.epsilon) + ", lambda = " + fmt(r.lambda);
  if (!r.scan.rows.empty()) {
    const GlueReport& best = r.scan.rows[static_cast<std::size_t>(r.lambda) - 1];
    det += ", outer margin = " + fmt(best.outer_margin) + ", inner margin = " + fmt(best.inner_margin);
  }
  rep.checks.push_back(check_flag("lambda-reaches-epsilon", r.gluing_pass, samples, det));
  rep.checks.push_back(check_below("seam-jet-residual", seam, cfg.number("tol_seam"),
                                   static_cast<int>(r.scan.rows.size())));
  rep.checks.push_back(check_near("inner-deficit-slope", r.scan.inner_slope, -1.0, kInnerSlopeTol,
                                  static_cast<int>(r.scan.rows.size()), "log-log slope of the inner deficit in lambda"));
  json rows = json::array();
  for (const GlueReport& g : r.scan.rows) rows.push_back(glue_row_json(g));
  rep.results["gluing"] = json{{"target", r.target},       {"epsilon", r.epsilon},
                               {"min_input_excess", r.min_input_excess}, {"lambda", r.lambda},
                               {"inner_slope", r.scan.inner_slope},   {"corner", corner_json(r.corner)},
                               {"scan", rows}};
}

void thm_c_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const double sd = cfg.number("subharmonic_delta");
  const SubharmonicReport sh = subharmonic_check(n, sd, cfg.integer("subharmonic_samples"), ctx.seed() + 30);
  rep.checks.push_back(check_at_least("flat-function-subharmonic", sh.min_laplacian, 0.0, sh.samples,
                                      "min Lap exp(-1/(f - delta)) at delta = " + fmt(sd)));
  rep.checks.push_back(check_at_least("flat-function-sufficient-bound", sh.min_sufficient, 0.0, sh.samples));
  const RTildeReport rt = r_tilde_check(n, sd, 200, ctx.seed() + 31);
  rep.checks.push_back(check_above("flattened-scalar-excess", rt.min_scaled_excess, 0.0, rt.samples,
                                   "min (R - n(n-1)) exp(1/(f - delta))"));

  const GluedResult& r = ctx.thm_c();
  const DeltaRow& chosen = r.delta_choice.table.back();
  rep.checks.push_back(check_above("delta-mean-curvature-gap", chosen.gap, 0.0, cfg.integer("boundary_samples"),
                                   "delta = " + fmt(r.delta)));
  rep.checks.push_back(check_below("delta-boundary-match", r.corner.boundary_mismatch, cfg.number("tol_boundary"),
                                   r.corner.samples, "max |g_delta - tilde g_delta| on {f = 2 delta}"));
  const FinalCheck& f = r.final_check;
  rep.checks.push_back(check_at_least("final-min-scalar", f.min_excess, -f.tolerance, f.samples,
                                      "min R - n(n-1); bound allows rounding of size tolerance"));
  rep.checks.push_back(check_above("final-strict-excess", f.strict, 0.0, f.samples,
                                   "samples with R - n(n-1) above the tolerance"));
  rep.checks.push_back(check_below("final-round-region", f.round_error, kRoundExactTol, f.round_samples,
                                   "max |g - gbar| where f <= delta"));
  rep.results["thmc"] = glued_json(r);
}

void corollary_suite(RunContext& ctx, VerificationReport& rep) {
  const Config& cfg = ctx.config();
  const int n = ctx.n();
  const CollarParams cp = ctx.corollary_options().collar;
  rep.checks.push_back(check_above("collar-scalar-excess", collar_min_excess(n, cp), 0.0, 401,
                                   "min R - n(n-1) of the warped collar on the gluing band"));
  const GluedResult& r = ctx.corollary();
  const FinalCheck& f = r.final_check;
  rep.checks.push_back(check_below("final-boundary-second-form", f.boundary_form, cfg.number("tol_boundary"),
                                   ctx.corollary_options().boundary_samples, "max |A| on the equator"));
  rep.checks.push_back(check_above("final-min-scalar", f.min_excess, 0.0, f.samples, "min R - n(n-1)"));
  rep.results["corollary"] = glued_json(r);
}

using SuiteFn = void (*)(RunContext&, VerificationReport&);

SuiteFn suite_fn(const std::string& name) {
  if (name == "engine") return engine_suite;
  if (name == "eta") return eta_suite;
  if (name == "variation") return variation_suite;
  if (name == "deformation") return deformation_suite;
  if (name == "gluing") return gluing_suite;
  if (name == "thmc") return thm_c_suite;
  if (name == "corollary") return corollary_suite;
  throw Error("invalid-usage", "unknown suite '" + name + "'");
}

void run_guarded(const std::string& name, SuiteFn fn, RunContext& ctx, VerificationReport& rep) {
  try {
    fn(ctx, rep);
  } catch (const Error& e) {
    if (is_usage_error(e.code())) throw;
    rep.checks.push_back(check_flag(name + "-completed", false, 0, e.what()));
    rep.results[name + "_error"] = e.code();
  }
}

// ------------------------------------------------------------------ csv

std::string csv_join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + "\n";
}

std::string csv_header(int n, const std::vector<std::string>& tail) {
  std::vector<std::string> cells;
  for (int i = 0; i < n; ++i) cells.push_back("y" + std::to_string(i + 1));
  cells.insert(cells.end(), tail.begin(), tail.end());
  return csv_join(cells);
}

std::string height_text(const Point& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return csv_number((1.0 - s) / (1.0 + s));
}

std::string deformation_field_csv(const DeformationResult& def, int count, unsigned seed) {
  const int n = def.spec.n;
  const auto pts = random_ball_points(n, count, 1.0, seed);
  const auto r = index_map(pts.size(), [&](std::size_t i) { return scalar_curvature(def.metric, pts[i]); });
  std::string out = csv_header(n, {"f", "R", "branch"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::string> cells;
    for (double v : pts[i]) cells.push_back(csv_number(v));
    cells.push_back(height_text(pts[i]));
    cells.push_back(csv_number(r[i]));
    cells.push_back(std::to_string(static_cast<int>(Branch::Base)));
    out += csv_join(cells);
  }
  return out;
}

// Random hemisphere points plus points on normal rays through the gluing band.
std::string glued_field_csv(const GluedResult& g, int count, unsigned seed) {
  const int n = g.n;
  std::vector<Point> pts = random_ball_points(n, count, 1.0, seed);
  const double lo = std::exp(-2.0 * g.lambda * g.lambda);
  constexpr int kDepths = 25;
  for (const Point& b : g.data.boundary_samples(8, seed + 1))
    for (int k = 0; k < kDepths; ++k) {
      const double rho = std::exp(std::log(lo) + (std::log(g.data.cut_end) - std::log(lo)) * k / (kDepths - 1));
      pts.push_back(g.data.along_normal(b, rho));
    }
  struct Row {
    double r;
    Branch b;
  };
  const auto rows = index_map(pts.size(), [&](std::size_t i) {
    return Row{scalar_curvature(g.metric, pts[i]), branch_at(g.data, g.lambda, pts[i])};
  });
  std::string out = csv_header(n, {"f", "R", "branch"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::string> cells;
    for (double v : pts[i]) cells.push_back(csv_number(v));
    cells.push_back(height_text(pts[i]));
    cells.push_back(csv_number(rows[i].r));
    cells.push_back(std::to_string(static_cast<int>(rows[i].b)));
    out += csv_join(cells);
  }
  return out;
}

std::string ray_csv(const GluedResult& g, int count, unsigned seed) {
  std::string out = csv_join({"rho", "R_hat", "R_g", "R_gt", "branch"});
  const Point foot = g.data.boundary_samples(1, seed)[0];
  for (const RayRow& r : normal_ray(g.data, g.lambda, foot, count))
    out += csv_join({csv_number(r.rho), csv_number(r.r_hat), csv_number(r.r_g), csv_number(r.r_gt),
                     std::to_string(static_cast<int>(r.branch))});
  return out;
}

// ------------------------------------------------------------------ sweeps

std::vector<double> default_grid(const std::string& param) {
  std::vector<double> v;
  if (param == "t")
    for (int k = 0; k <= 10; ++k) v.push_back(0.2 * std::ldexp(1.0, -k));
  else if (param == "lambda")
    for (int l = 1; l <= static_cast<int>(kMaxLambda); ++l) v.push_back(l);
  else if (param == "delta")
    for (int k = 0; k <= 12; ++k) v.push_back(0.1 * std::ldexp(1.0, -k));
  else if (param == "c")
    for (int k = 1; k <= 9; ++k) v.push_back(0.005 * k);
  else
    for (int k = 0; k <= 8; ++k) v.push_back(0.025 * k);
  return v;
}

void check_caps(const std::string& param, const std::vector<double>& values) {
  for (double v : values) {
    bool ok = std::isfinite(v);
    if (param == "t") ok = ok && v > 0.0 && v <= 1.0;
    if (param == "lambda") ok = ok && v >= 1.0 && v <= kMaxLambda;
    if (param == "delta") ok = ok && v > 0.0 && v < 0.125;
    if (param == "c") ok = ok && v > 0.0;
    if (param == "kappa") ok = ok && v >= 0.0 && v <= 1.0;
    if (!ok) throw Error("cap-violation", param + " = " + fmt(v) + " is outside the allowed range");
  }
}

void sweep_t(RunContext& ctx, const std::vector<double>& values, SweepOutput& out) {
  const DeformationResult& def = ctx.deformation();
  const DeformationOptions o = ctx.deformation_options();
  const auto interior = margin_samples(ctx.n(), o);
  const auto equator = equator_samples(ctx.n(), o.equator_samples, o.seed + 1);
  out.csv = csv_join({"t", "r_margin", "h_margin", "boundary_match", "pass"});
  std::vector<Margins> rows;
  for (double t : values) rows.push_back(deformation_margins(def.spec, def.u.field, t, interior, equator));
  json arr = json::array();
  for (const Margins& m : rows) {
    out.csv += csv_join({csv_number(m.t), csv_number(m.r_margin), csv_number(m.h_margin), csv_number(m.boundary_match),
                         m.pass ? "1" : "0"});
    arr.push_back(margins_json(m));
  }
  out.report.results["rows"] = arr;
  // Slopes between the two smallest t values.
  std::vector<Margins> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const Margins& a, const Margins& b) { return a.t < b.t; });
  if (sorted.size() >= 2 && sorted[0].r_margin > 0.0 && sorted[1].r_margin > 0.0) {
    out.report.results["r_slope"] = slope(sorted[1].t, sorted[1].r_margin, sorted[0].t, sorted[0].r_margin);
    out.report.results["h_slope"] = slope(sorted[1].t, sorted[1].h_margin, sorted[0].t, sorted[0].h_margin);
  }
}

void sweep_lambda(RunContext& ctx, const std::vector<double>& values, SweepOutput& out) {
  const GluedResult& g = ctx.config().text("corner") == "thmc" ? ctx.thm_c() : ctx.corollary();
  const LambdaScan scan = scan_lambda(g.data, g.epsilon, values);
  out.csv = csv_join({"lambda", "outer_margin", "inner_margin", "inner_deficit", "outer_structure", "a_estimate",
                      "seam_residual", "pass"});
  json arr = json::array();
  for (const GlueReport& r : scan.rows) {
    out.csv += csv_join({csv_number(r.lambda), csv_number(r.outer_margin), csv_number(r.inner_margin),
                         csv_number(r.inner_deficit), csv_number(r.outer_structure), csv_number(r.a_estimate),
                         csv_number(r.seam_residual), r.pass ? "1" : "0"});
    arr.push_back(glue_row_json(r));
  }
  out.report.results["corner"] = g.target;
  out.report.results["epsilon"] = g.epsilon;
  out.report.results["inner_slope"] = scan.inner_slope;
  out.report.results["rows"] = arr;
}

void sweep_delta(RunContext& ctx, const std::vector<double>& values, SweepOutput& out) {
  const DeformationResult& def = ctx.deformation();
  const ThmCOptions o = ctx.thm_c_options();
  out.csv = csv_join({"delta", "tau", "h_tilde_sup", "h_g_inf", "gap", "r_min", "pass"});
  json arr = json::array();
  for (double d : values) {
    const DeltaRow r = evaluate_delta(def, d, o.boundary_samples, o.seed + 4);
    out.csv += csv_join({csv_number(r.delta), csv_number(r.tau), csv_number(r.h_tilde_sup), csv_number(r.h_g_inf),
                         csv_number(r.gap), csv_number(r.r_min), r.pass ? "1" : "0"});
    arr.push_back(delta_row_json(r));
  }
  out.report.results["rows"] = arr;
}

void sweep_c(RunContext& ctx, const std::vector<double>& values, SweepOutput& out) {
  const Config& cfg = ctx.config();
  const EtaSpec base = choose_c(ctx.n());
  const QuadratureRule rule = harmonic_rule(ctx.n(), cfg.integer("basis_degree"));
  out.csv = csv_join({"c", "boundary_quadratic", "mu", "qf_integral", "q_sup"});
  json arr = json::array();
  for (double c : values) {
    EtaSpec spec = base;
    spec.c = c;
    spec.quadratic = base.quadratic_at(c);
    const MuResult mu = compute_mu(spec, rule, cfg.number("q_step"));
    out.csv += csv_join(
        {csv_number(c), csv_number(spec.quadratic), csv_number(mu.mu), csv_number(mu.qf_integral), csv_number(mu.q_sup)});
    arr.push_back(json{{"c", c}, {"boundary_quadratic", spec.quadratic}, {"mu", mu.mu}, {"qf_integral", mu.qf_integral},
                       {"q_sup", mu.q_sup}});
  }
  out.report.results["threshold"] = base.threshold;
  out.report.results["rows"] = arr;
}

void sweep_kappa(RunContext& ctx, const std::vector<double>& values, SweepOutput& out) {
  const int n = ctx.n();
  const CollarParams base = ctx.corollary_options().collar;
  const Hypersurface equator = chart_sphere(n, 1.0);
  const auto feet = random_sphere_points(n, 8, 1.0, ctx.seed() + 9);
  out.csv = csv_join({"kappa", "r_at_zero", "min_collar_excess", "boundary_form", "accepted"});
  json arr = json::array();
  for (double k : values) {
    CollarParams p = base;
    p.kappa = k;
    const double r0 = warped_scalar(n, collar_warp(p, 0.0));
    const double ex = collar_min_excess(n, p);
    const MetricField g = collar_metric(n, p);
    double form = 0.0;
    for (const Point& b : feet) {
      const SurfaceGeometry sg = surface_geometry(g, equator, b);
      for (int i = 0; i < sg.k; ++i)
        for (int j = 0; j < sg.k; ++j) form = std::max(form, std::abs(sg.second_form[i][j]));
    }
    const bool accepted = ex > 0.0;
    out.csv += csv_join({csv_number(k), csv_number(r0), csv_number(ex), csv_number(form), accepted ? "1" : "0"});
    arr.push_back(json{{"kappa", k}, {"r_at_zero", r0}, {"min_collar_excess", ex}, {"boundary_form", form},
                       {"accepted", accepted}});
  }
  out.report.results["width"] = base.width;
  out.report.results["collar"] = base.collar;
  out.report.results["rows"] = arr;
}

}  // namespace

// ------------------------------------------------------------------ public

RunContext::RunContext(Config config) : config_(std::move(config)) {
  config_.validate();
  n_ = config_.integer("n");
  seed_ = static_cast<unsigned>(config_.integer("seed"));
}

DeformationOptions RunContext::deformation_options() const {
  DeformationOptions o;
  o.basis_degree = config_.integer("basis_degree");
  o.interior_samples = config_.integer("interior_samples");
  o.equator_samples = config_.integer("equator_samples");
  o.seed = seed_;
  o.t_start = config_.number("t_start");
  o.t_steps = config_.integer("t_steps");
  o.q_step = config_.number("q_step");
  return o;
}

ThmCOptions RunContext::thm_c_options() const {
  ThmCOptions o;
  o.delta_max = config_.number("delta");
  o.boundary_samples = config_.integer("boundary_samples");
  o.epsilon = config_.number("epsilon");
  o.final_samples = config_.integer("final_samples");
  o.seed = seed_;
  return o;
}

CorollaryOptions RunContext::corollary_options() const {
  CorollaryOptions o;
  o.collar.kappa = config_.number("kappa");
  o.collar.width = config_.number("width");
  o.collar.collar = config_.number("collar");
  o.epsilon = config_.number("epsilon");
  o.final_samples = config_.integer("final_samples");
  o.seed = seed_;
  return o;
}

const DeformationResult& RunContext::deformation() {
  if (!deformation_) deformation_ = build_deformation(n_, deformation_options());
  return *deformation_;
}

const GluedResult& RunContext::thm_c() {
  if (!thm_c_) thm_c_ = build_thm_c(deformation(), thm_c_options());
  return *thm_c_;
}

const GluedResult& RunContext::corollary() {
  if (!corollary_) corollary_ = build_corollary(deformation(), corollary_options());
  return *corollary_;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"engine", "eta",  "variation", "deformation",
                                              "gluing", "thmc", "corollary"};
  return names;
}

VerificationReport run_verify(const std::string& suite, RunContext& ctx) {
  VerificationReport rep;
  rep.command = "verify";
  rep.target = suite;
  rep.config = ctx.config().entries();
  rep.results = json::object();
  if (suite == "all") {
    for (const std::string& s : suite_names()) run_guarded(s, suite_fn(s), ctx, rep);
  } else {
    run_guarded(suite, suite_fn(suite), ctx, rep);
  }
  return rep;
}

const std::vector<std::string>& build_targets() {
  static const std::vector<std::string> t{"deformation", "thmc", "corollary"};
  return t;
}

BuildOutput run_build(const std::string& target, RunContext& ctx) {
  const Config& cfg = ctx.config();
  BuildOutput out;
  VerificationReport& rep = out.report;
  rep.command = "build";
  rep.target = target;
  rep.config = cfg.entries();
  rep.results = json::object();
  const int fields = cfg.integer("field_points");
  if (target == "deformation") {
    const DeformationResult& def = ctx.deformation();
    const Margins& a = def.accepted;
    rep.checks.push_back(check_above("scalar-margin", a.r_margin, 0.0, def.interior_count));
    rep.checks.push_back(check_above("mean-curvature-margin", a.h_margin, 0.0, cfg.integer("equator_samples")));
    rep.checks.push_back(check_below("boundary-metric-match", a.boundary_match, cfg.number("tol_boundary"),
                                     cfg.integer("equator_samples")));
    out.bundle = deformation_json(def, ctx.deformation_options());
    out.csv.push_back({"_field.csv", deformation_field_csv(def, fields, ctx.seed() + 20)});
  } else if (target == "thmc" || target == "corollary") {
    const GluedResult& g = target == "thmc" ? ctx.thm_c() : ctx.corollary();
    const FinalCheck& f = g.final_check;
    if (target == "thmc") {
      rep.checks.push_back(check_at_least("final-min-scalar", f.min_excess, -f.tolerance, f.samples));
      rep.checks.push_back(check_above("final-strict-excess", f.strict, 0.0, f.samples));
      rep.checks.push_back(check_below("final-round-region", f.round_error, kRoundExactTol, f.round_samples));
    } else {
      rep.checks.push_back(check_below("final-boundary-second-form", f.boundary_form, cfg.number("tol_boundary"),
                                       ctx.corollary_options().boundary_samples));
      rep.checks.push_back(check_above("final-min-scalar", f.min_excess, 0.0, f.samples));
    }
    rep.checks.push_back(check_flag("lambda-reaches-epsilon", g.gluing_pass, 0,
                                    "epsilon = " + fmt(g.epsilon) + ", lambda = " + fmt(g.lambda)));
    out.bundle = glued_json(g);
    out.csv.push_back({"_field.csv", glued_field_csv(g, fields, ctx.seed() + 20)});
    out.csv.push_back({"_ray.csv", ray_csv(g, cfg.integer("ray_points"), ctx.seed() + 21)});
  } else {
    throw Error("invalid-usage", "unknown build target '" + target + "'");
  }
  rep.results["bundle"] = out.bundle;
  return out;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> p{"t", "lambda", "delta", "c", "kappa"};
  return p;
}

std::vector<double> sweep_grid(const std::string& param, const Config& config) {
  const auto& ps = sweep_parameters();
  if (std::find(ps.begin(), ps.end(), param) == ps.end())
    throw Error("invalid-usage", "unknown sweep parameter '" + param + "'");
  std::vector<double> values = config.list("sweep_values");
  const std::string& range = config.text("sweep_range");
  if (values.empty() && !range.empty()) {
    std::stringstream ss(range);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
      throw Error("invalid-config", "sweep_range must be lo:hi:count");
    Config tmp = Config::defaults();
    tmp.set("sweep_values", a + "," + b + "," + c);
    const auto abc = tmp.list("sweep_values");
    const int count = static_cast<int>(abc[2]);
    if (count < 1 || abc[2] != count) throw Error("invalid-config", "sweep_range count must be a positive integer");
    const bool log = config.text("sweep_scale") == "log";
    if (log && !(abc[0] > 0.0 && abc[1] > 0.0)) throw Error("cap-violation", "log sweep needs positive ends");
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      values.push_back(log ? std::exp(std::log(abc[0]) + f * (std::log(abc[1]) - std::log(abc[0])))
                           : abc[0] + f * (abc[1] - abc[0]));
    }
  }
  if (values.empty()) values = default_grid(param);
  check_caps(param, values);
  return values;
}

SweepOutput run_sweep(const std::string& param, RunContext& ctx) {
  const std::vector<double> values = sweep_grid(param, ctx.config());
  SweepOutput out;
  out.report.command = "sweep";
  out.report.target = param;
  out.report.config = ctx.config().entries();
  out.report.results = json::object();
  if (param == "t") sweep_t(ctx, values, out);
  if (param == "lambda") sweep_lambda(ctx, values, out);
  if (param == "delta") sweep_delta(ctx, values, out);
  if (param == "c") sweep_c(ctx, values, out);
  if (param == "kappa") sweep_kappa(ctx, values, out);
  out.report.checks.push_back(check_flag("rows-computed", true, static_cast<int>(values.size())));
  return out;
}

json deformation_json(const DeformationResult& def, const DeformationOptions& opts) {
  json j;
  j["construction"] = "deformation";
  j["n"] = def.spec.n;
  j["c"] = def.spec.c;
  j["t"] = def.t;
  j["mu"] = def.mu.mu;
  j["q_sup"] = def.mu.q_sup;
  j["basis"] = json{{"space", "dirichlet"}, {"max_degree", opts.basis_degree}, {"rule", "harmonic"}};
  j["quadrature"] = json{{"radial", 2 * opts.basis_degree + 40}, {"angular", opts.basis_degree + 8}};
  j["q_step"] = opts.q_step;
  json coeffs = json::array();
  for (std::size_t k = 0; k < def.u.coeffs.size(); ++k) {
    const HarmonicElement& e = def.u.basis.elements[k];
    coeffs.push_back(json{{"degree", e.degree}, {"eigenvalue", e.eigenvalue}, {"coeff", def.u.coeffs[k]}});
  }
  j["u_coeffs"] = coeffs;
  j["margins"] = margins_json(def.accepted);
  json scan = json::array();
  for (const Margins& m : def.scan) scan.push_back(margins_json(m));
  j["t_scan"] = scan;
  j["r_slope"] = def.r_slope;
  j["h_slope"] = def.h_slope;
  j["slope_t"] = json::array({def.slope_t[0], def.slope_t[1]});
  j["samples"] = json{{"interior", opts.interior_samples},
                      {"zonal_grid", json::array({opts.zonal_polar, opts.zonal_azimuthal + 1})},
                      {"equator", opts.equator_samples},
                      {"seed", opts.seed}};
  j["uniform_steps"] = opts.uniform_steps;
  return j;
}

json glued_json(const GluedResult& r) {
  json j;
  j["construction"] = r.target;
  j["n"] = r.n;
  j["t"] = r.t;
  j["delta"] = r.delta;
  j["tau"] = r.tau;
  j["kappa"] = r.kappa;
  j["width"] = r.width;
  j["collar"] = r.collar;
  j["lambda"] = r.lambda;
  j["epsilon"] = r.epsilon;
  j["identifiers"] = json{{"chart", "stereographic-south"},
                          {"metric", r.metric.name},
                          {"base", r.data.g.name},
                          {"inner", r.data.gt.name},
                          {"cutoff_outer", "chi-quintic-hermite"},
                          {"cutoff_inner", "beta-smoothstep"}};
  j["corner"] = json{{"label", r.data.label},
                     {"cut_start", r.data.cut_start},
                     {"cut_end", r.data.cut_end},
                     {"rho_max", r.data.rho_max},
                     {"report", corner_json(r.corner)}};
  j["min_input_excess"] = r.min_input_excess;
  j["gluing_pass"] = r.gluing_pass;
  json scan = json::array();
  for (const GlueReport& g : r.scan.rows) scan.push_back(glue_row_json(g));
  j["lambda_scan"] = scan;
  j["inner_slope"] = r.scan.inner_slope;
  json deltas = json::array();
  for (const DeltaRow& d : r.delta_choice.table) deltas.push_back(delta_row_json(d));
  j["delta_scan"] = deltas;
  j["final"] = final_json(r.final_check);
  j["pass"] = r.pass;
  return j;
}

std::string summary_table(const VerificationReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-36s %-6s %14s %14s %14s %8s\n", "check", "status", "value", "bound", "margin",
                "samples");
  os << line;
  for (const Check& c : report.checks) {
    std::snprintf(line, sizeof line, "%-36s %-6s %14.6g %14.6g %14.6g %8d\n", c.id.c_str(),
                  status_name(c.status).c_str(), c.value, c.tolerance, c.margin, c.samples);
    os << line;
  }
  os << "overall: " << (report.pass() ? "pass" : "fail") << "\n";
  return os.str();
}

bool is_usage_error(const std::string& code) {
  return code == "invalid-config" || code == "unsupported-dimension" || code == "cap-violation" ||
         code == "invalid-usage";
}

}  // namespace hemi
