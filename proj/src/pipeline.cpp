#include "hemiglue/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hemiglue/error.hpp"
#include "hemiglue/parallel.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

namespace {

// exp(-1/x) and its jets vanish in double precision below this x.
constexpr double kFlatGap = 1.0 / 700.0;
constexpr double kRoundTolerance = 1e-9;

void require_dimension(int n) {
  if (n < 3) throw Error("unsupported-dimension", "the constructions need n >= 3");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.125)) throw Error("invalid-delta", "delta must lie in (0, 1/8)");
}

double chart_radius(double f) { return std::sqrt((1.0 - f) / (1.0 + f)); }

double height_of(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return (1.0 - s) / (1.0 + s);
}

// Closed-form Laplacian of E = exp(-1/(f - delta)) as a function of the height.
double flat_laplacian(int n, double delta, double f) {
  const double x = f - delta;
  if (x <= 0.0) return 0.0;
  const double e = std::exp(-1.0 / x);
  return e * ((1.0 - f * f) * (1.0 / std::pow(x, 4) - 2.0 / std::pow(x, 3)) - n * f / (x * x));
}

// R - n(n-1) of tilde_g_delta from the conformal formula, without cancellation.
double tilde_excess(int n, double delta, double f) {
  const double x = f - delta;
  if (x <= 0.0) return 0.0;
  const double e = std::exp(-1.0 / x);
  const double log_w = std::log1p(-e);
  const double p = static_cast<double>(n - 2);
  return 4.0 * (n - 1) / p * std::exp(-(n + 2) / p * log_w) * flat_laplacian(n, delta, f) +
         n * (n - 1) * std::expm1(-4.0 / p * log_w);
}

// The same excess times exp(1/(f - delta)); positive and representable for every x > 0.
double scaled_tilde_excess(int n, double delta, double f) {
  const double x = f - delta;
  const double e = std::exp(-1.0 / x);
  const double log_w = std::log1p(-e);
  const double p = static_cast<double>(n - 2);
  const double lap = (1.0 - f * f) * (1.0 / std::pow(x, 4) - 2.0 / std::pow(x, 3)) - n * f / (x * x);
  const double conf = e > 0.0 ? std::expm1(-4.0 / p * log_w) / e : 4.0 / p;
  return 4.0 * (n - 1) / p * std::exp(-(n + 2) / p * log_w) * lap + n * (n - 1) * conf;
}

double round_scalar(int n) { return n * (n - 1.0); }

struct Assembly {
  double epsilon = 0.0;
  double min_excess = 0.0;
  LambdaScan scan;
  double lambda = 0.0;
  bool pass = false;
};

// Minimum input excess over the gluing region, epsilon, and the lambda scan.
Assembly assemble(const CornerData& data, double epsilon, const SamplePlan& plan) {
  const int n = data.n;
  const auto feet = data.boundary_samples(plan.boundary_points, plan.seed + 7);
  constexpr int kDepths = 9;
  const auto ex = index_map(feet.size() * kDepths, [&](std::size_t i) {
    const Point& b = feet[i / kDepths];
    const double rho = data.cut_end * static_cast<double>(i % kDepths) / kDepths;
    const Point p = rho > 0.0 ? data.along_normal(b, rho) : b;
    return std::min(scalar_curvature(data.g, p), scalar_curvature(data.gt, p)) - round_scalar(n);
  });
  Assembly a;
  a.min_excess = *std::min_element(ex.begin(), ex.end());
  a.epsilon = epsilon > 0.0 ? epsilon : std::max(0.0, 0.5 * a.min_excess);
  std::vector<double> lambdas;
  for (int l = 1; l <= static_cast<int>(kMaxLambda); ++l) lambdas.push_back(l);
  a.scan = scan_lambda(data, a.epsilon, lambdas, plan);
  if (a.scan.lambda > 0.0) {
    a.lambda = a.scan.lambda;
    a.pass = true;
  } else {
    // No lambda reaches epsilon: keep the one with the best worst margin.
    double best = -std::numeric_limits<double>::infinity();
    for (const GlueReport& r : a.scan.rows) {
      const double m = std::min(r.outer_margin, r.inner_margin);
      if (m > best) {
        best = m;
        a.lambda = r.lambda;
      }
    }
  }
  return a;
}

// R of the final metric over hemisphere samples and the gluing shells.
FinalCheck final_scalar_check(const CornerData& data, double lambda, const SamplePlan& plan, int samples,
                              unsigned seed) {
  const int n = data.n;
  const CutoffChi chi = build_chi();
  const CutoffBeta beta = build_beta();
  const MetricField glued = hat_g(data, chi, beta, lambda);
  struct Probe {
    Point p;
    double shift = 0.0;
  };
  std::vector<Probe> probes;
  for (Point& p : interior_samples(n, samples, seed)) probes.push_back({std::move(p), 0.0});
  const std::size_t hemi_count = probes.size();
  for (GlueSample& s : glue_samples(data, lambda, plan))
    if (s.rho < data.cut_end) probes.push_back({std::move(s.point), s.shift});
  const auto excess = index_map(probes.size(), [&](std::size_t i) {
    const Probe& pr = probes[i];
    const MetricField& g = pr.shift > 0.0 ? hat_g(data, chi, beta, lambda, pr.shift) : glued;
    return scalar_curvature(g, pr.p) - round_scalar(n);
  });
  FinalCheck fc;
  fc.samples = static_cast<int>(probes.size());
  fc.gluing_samples = static_cast<int>(probes.size() - hemi_count);
  fc.tolerance = kRoundTolerance;
  fc.min_excess = *std::min_element(excess.begin(), excess.end());
  fc.max_excess = *std::max_element(excess.begin(), excess.end());
  for (double e : excess)
    if (e > fc.tolerance) ++fc.strict;
  return fc;
}

}  // namespace

double tilde_factor(int n, double delta, double f) {
  require_dimension(n);
  const double x = f - delta;
  if (x <= kFlatGap) return 1.0;
  return std::exp(4.0 / (n - 2) * std::log1p(-std::exp(-1.0 / x)));
}

MetricField tilde_g_delta(int n, double delta) {
  require_dimension(n);
  const ScalarField factor = [n, delta](const JetVec& y) {
    const Jet f = height(y);
    if (f.value() - delta <= kFlatGap) return Jet(f.dim(), f.order(), 1.0);
    return pow(1.0 - exp(-1.0 / (f - delta)), 4.0 / (n - 2));
  };
  return conformal_round(n, factor, 2, "tilde-delta");
}

std::vector<Point> collar_points(int n, double delta, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto dirs = random_sphere_points(n, count, 1.0, seed + 1);
  std::vector<Point> out;
  out.reserve(dirs.size());
  for (const Point& d : dirs) {
    const double f = delta + 2.0 * delta * (1e-3 + 0.998 * unit(rng));
    Point p = d;
    for (double& v : p) v *= chart_radius(f);
    out.push_back(std::move(p));
  }
  return out;
}

SubharmonicReport subharmonic_check(int n, double delta, int samples, unsigned seed) {
  require_dimension(n);
  require_delta(delta);
  const MetricField round = round_metric(n);
  const ScalarField flat = [delta](const JetVec& y) {
    const Jet f = height(y);
    if (f.value() - delta <= kFlatGap) return Jet(f.dim(), f.order(), 0.0);
    return exp(-1.0 / (f - delta));
  };
  const auto pts = collar_points(n, delta, samples, seed);
  struct Row {
    double lap, bound, err;
  };
  const auto rows = index_map(pts.size(), [&](std::size_t i) {
    const double f = height_of(pts[i]);
    const double x = f - delta;
    const double lap = hessian_laplacian(flat, round, pts[i]).laplacian;
    const double closed = flat_laplacian(n, delta, f);
    const double scale = std::max(std::abs(closed), std::numeric_limits<double>::min());
    return Row{lap, 1.0 / (4.0 * std::pow(x, 4)) - n * f / (x * x), std::abs(lap - closed) / scale};
  });
  SubharmonicReport r;
  r.samples = static_cast<int>(pts.size());
  r.min_laplacian = r.min_sufficient = std::numeric_limits<double>::infinity();
  for (const Row& row : rows) {
    r.min_laplacian = std::min(r.min_laplacian, row.lap);
    r.min_sufficient = std::min(r.min_sufficient, row.bound);
    r.max_formula_error = std::max(r.max_formula_error, row.err);
  }
  r.pass = r.min_laplacian >= 0.0 && r.min_sufficient >= 0.0;
  return r;
}

RTildeReport r_tilde_check(int n, double delta, int samples, unsigned seed) {
  require_dimension(n);
  require_delta(delta);
  const MetricField gt = tilde_g_delta(n, delta);
  const double base = round_scalar(n);
  const auto pts = collar_points(n, delta, samples, seed);
  struct Row {
    double excess, scaled, direct, rel;
  };
  const auto rows = index_map(pts.size(), [&](std::size_t i) {
    const double f = height_of(pts[i]);
    const double excess = tilde_excess(n, delta, f);
    const double direct = scalar_curvature(gt, pts[i]);
    return Row{excess, scaled_tilde_excess(n, delta, f), direct - base,
               std::abs(direct - (base + excess)) / (base + excess)};
  });
  RTildeReport r;
  r.samples = static_cast<int>(pts.size());
  r.min_excess = r.min_scaled_excess = r.min_resolved_excess = std::numeric_limits<double>::infinity();
  for (const Row& row : rows) {
    r.min_excess = std::min(r.min_excess, row.excess);
    r.min_scaled_excess = std::min(r.min_scaled_excess, row.scaled);
    r.max_relative_error = std::max(r.max_relative_error, row.rel);
    if (row.excess > 1e-9 * base) {
      ++r.resolved;
      r.min_resolved_excess = std::min(r.min_resolved_excess, row.direct);
    }
  }
  r.pass = r.min_scaled_excess > 0.0 && r.min_excess >= 0.0 && (r.resolved == 0 || r.min_resolved_excess > 0.0) && r.max_relative_error < 1e-8;
  return r;
}

double tau_for_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error("invalid-delta", "delta must lie in (0, 1/2)");
  return -2.0 * delta / (1.0 + std::sqrt(1.0 - 4.0 * delta * delta));
}

Point psi_tau(double tau, std::span<const double> x) {
  if (!(std::abs(tau) < 1.0)) throw Error("invalid-tau", "need |tau| < 1");
  const std::size_t last = x.size() - 1;
  const double den = 1.0 + tau * tau + 2.0 * tau * x[last];
  Point out(x.size());
  for (std::size_t i = 0; i < last; ++i) out[i] = (1.0 - tau * tau) * x[i] / den;
  out[last] = ((1.0 + tau * tau) * x[last] + 2.0 * tau) / den;
  return out;
}

double psi_dilation(double tau) {
  if (!(std::abs(tau) < 1.0)) throw Error("invalid-tau", "need |tau| < 1");
  return (1.0 - tau) / (1.0 + tau);
}

ChartMap psi_tau_chart(double tau) {
  const double k = psi_dilation(tau);
  return [k](const JetVec& y) {
    JetVec z = y;
    for (Jet& v : z) v *= k;
    return z;
  };
}

double g_delta_scale(int n, double delta) {
  require_dimension(n);
  return std::exp(4.0 / (n - 2) * std::log1p(-std::exp(-1.0 / delta))) * (1.0 - 4.0 * delta * delta);
}

MetricField g_delta(const MetricField& g, int n, double delta) {
  const double k = psi_dilation(tau_for_delta(delta));
  const double scale = g_delta_scale(n, delta) * k * k;
  MetricField out;
  out.dim = n;
  out.input_order = g.input_order;
  out.name = "g-delta";
  out.eval = [g, k, scale](const JetVec& y) {
    JetVec z = y;
    for (Jet& v : z) v *= k;
    return g.eval(z) * scale;
  };
  return out;
}

DeltaRow evaluate_delta(const DeformationResult& def, double delta, int boundary_samples, unsigned seed) {
  const int n = def.spec.n;
  require_delta(delta);
  const auto dirs = random_sphere_points(n, boundary_samples, 1.0, seed);
  const auto cap = interior_samples(n, 64, seed + 1);
  DeltaRow row;
  row.delta = delta;
  row.tau = tau_for_delta(delta);
  const double rb = chart_radius(2.0 * delta);
  const MetricField gd = g_delta(def.metric, n, delta);
  const MetricField gt = tilde_g_delta(n, delta);
  const Hypersurface edge = chart_sphere(n, rb);
  struct H {
    double tilde, glued;
  };
  const auto hs = index_map(dirs.size(), [&](std::size_t i) {
    Point b = dirs[i];
    for (double& v : b) v *= rb;
    return H{mean_curvature(gt, edge, b), mean_curvature(gd, edge, b)};
  });
  row.h_tilde_sup = -std::numeric_limits<double>::infinity();
  row.h_g_inf = std::numeric_limits<double>::infinity();
  for (const H& h : hs) {
    row.h_tilde_sup = std::max(row.h_tilde_sup, h.tilde);
    row.h_g_inf = std::min(row.h_g_inf, h.glued);
  }
  row.gap = row.h_g_inf - row.h_tilde_sup;
  const auto rs = index_map(cap.size(), [&](std::size_t i) {
    Point p = cap[i];
    for (double& v : p) v *= rb;
    return scalar_curvature(gd, p);
  });
  row.r_min = *std::min_element(rs.begin(), rs.end());
  row.pass = row.gap > 0.0 && row.r_min > round_scalar(n);
  return row;
}

DeltaChoice choose_delta(const DeformationResult& def, double delta_max, int boundary_samples, int max_halvings,
                         unsigned seed) {
  require_delta(delta_max);
  DeltaChoice out;
  for (int k = 0; k <= max_halvings; ++k) {
    const DeltaRow row = evaluate_delta(def, delta_max * std::ldexp(1.0, -k), boundary_samples, seed);
    out.table.push_back(row);
    if (row.pass) {
      out.delta = row.delta;
      return out;
    }
  }
  std::ostringstream os;
  os.precision(6);
  os << "no delta passes; delta gap r_min:";
  for (const DeltaRow& r : out.table) os << " [" << r.delta << ' ' << r.gap << ' ' << r.r_min << ']';
  throw Error("delta-selection-failed", os.str());
}

GluedResult build_thm_c(const DeformationResult& def, const ThmCOptions& opts) {
  const int n = def.spec.n;
  require_dimension(n);
  GluedResult out;
  out.target = "thmc";
  out.n = n;
  out.t = def.t;
  out.delta_choice = choose_delta(def, opts.delta_max, opts.boundary_samples, 24, opts.seed + 4);
  const double delta = out.delta_choice.delta;
  out.delta = delta;
  out.tau = tau_for_delta(delta);
  const double rho_u = std::asin(3.0 * delta) - std::asin(2.0 * delta);
  out.data = radial_corner(n, g_delta(def.metric, n, delta), tilde_g_delta(n, delta), 2.0 * delta, 0.5 * rho_u,
                           rho_u, "thmc");
  out.corner = validate_corner(out.data, opts.boundary_samples, opts.seed + 5);

  const Assembly a = assemble(out.data, opts.epsilon, opts.plan);
  out.epsilon = a.epsilon;
  out.min_input_excess = a.min_excess;
  out.scan = a.scan;
  out.lambda = a.lambda;
  out.gluing_pass = a.pass;

  const CutoffChi chi = build_chi();
  const CutoffBeta beta = build_beta();
  out.metric = hat_g(out.data, chi, beta, out.lambda);
  out.metric.name = "thmc";
  out.final_check = final_scalar_check(out.data, out.lambda, opts.plan, opts.final_samples, opts.seed);

  // The glued metric must be exactly round where f <= delta.
  const MetricField round = round_metric(n);
  const auto pts = collar_points(n, 0.25 * delta, 200, opts.seed + 6);  // f in (delta/4, 3 delta/4)
  std::vector<Point> below;
  for (const Point& p : pts) below.push_back(p);
  for (const Point& p : random_sphere_points(n, 50, 1.0, opts.seed + 8)) below.push_back(p);
  const auto err = index_map(below.size(), [&](std::size_t i) {
    const Mat a1 = metric_value(out.metric, below[i]);
    const Mat a2 = metric_value(round, below[i]);
    double m = 0.0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m = std::max(m, std::abs(a1[r][c] - a2[r][c]));
    return m;
  });
  out.final_check.round_samples = static_cast<int>(below.size());
  out.final_check.round_error = *std::max_element(err.begin(), err.end());
  const FinalCheck& fc = out.final_check;
  out.final_check.pass = fc.min_excess >= -fc.tolerance && fc.strict > 0 && fc.round_error <= 1e-14;
  out.pass = out.final_check.pass;
  return out;
}

WarpValue collar_warp(const CollarParams& p, double s) {
  // phi = cos(s) r(s), r = 1 - kappa s^2 e^{-s^2/w}.
  const double e = std::exp(-s * s / p.width);
  const double r = 1.0 - p.kappa * s * s * e;
  const double r1 = -p.kappa * e * (2.0 * s - 2.0 * s * s * s / p.width);
  const double r2 = -p.kappa * e * (2.0 - 10.0 * s * s / p.width + 4.0 * std::pow(s, 4) / (p.width * p.width));
  const double c = std::cos(s), sn = std::sin(s);
  return {c * r, -sn * r + c * r1, -c * r - 2.0 * sn * r1 + c * r2};
}

double warped_scalar(int n, const WarpValue& w) {
  return -2.0 * (n - 1) * w.d2 / w.phi + (n - 1.0) * (n - 2.0) * (1.0 - w.d1 * w.d1) / (w.phi * w.phi);
}

MetricField collar_metric(int n, const CollarParams& p) {
  require_dimension(n);
  MetricField out;
  out.dim = n;
  out.input_order = 2;
  out.name = "collar";
  out.eval = [n, p](const JetVec& y) {
    const Jet q = [&] {
      Jet s = y[0] * y[0];
      for (int i = 1; i < n; ++i) s += y[i] * y[i];
      return s;
    }();
    const Jet conf = round_factor(y);
    JetMatrix m(n, y[0].dim(), conf.order());
    for (int i = 0; i < n; ++i) m.set(i, i, conf);
    // Near the pole the collar term is below 1e-26 and its direction field is singular.
    const Jet f = height(y);
    if (1.0 - f.value() * f.value() < 1e-12) return m;
    const Jet s = asin(f);
    const Jet r = 1.0 - p.kappa * s * s * exp(-(s * s) / p.width);
    // g = r^2 gbar + (1 - r^2) ds^2, ds^2 = 4 y y^T / ((1+|y|^2)^2 |y|^2).
    const Jet r2 = r * r;
    const Jet radial = (1.0 - r2) * conf / q;
    JetMatrix out_m(n, y[0].dim(), conf.order());
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet e = radial * y[i] * y[j];
        if (i == j) e += r2 * conf;
        out_m.set(i, j, e);
      }
    return out_m;
  };
  return out;
}

GluedResult build_corollary(const DeformationResult& def, const CorollaryOptions& opts) {
  const int n = def.spec.n;
  require_dimension(n);
  const CollarParams& cp = opts.collar;
  if (!(cp.kappa > 0.0 && cp.width > 0.0 && cp.collar > 0.0 && cp.collar < 1.0))
    throw Error("invalid-collar", "collar parameters must be positive with collar < 1");
  // The collar must keep R above n(n-1) where it is glued in.
  for (int i = 0; i <= 400; ++i) {
    const double s = cp.collar * i / 400.0;
    const double excess = warped_scalar(n, collar_warp(cp, s)) - round_scalar(n);
    if (!(excess > 0.0)) {
      std::ostringstream os;
      os << "collar scalar curvature excess " << excess << " at s = " << s;
      throw Error("collar-rejected", os.str());
    }
  }
  GluedResult out;
  out.target = "corollary";
  out.n = n;
  out.t = def.t;
  out.kappa = cp.kappa;
  out.width = cp.width;
  out.collar = cp.collar;
  out.data = radial_corner(n, def.metric, collar_metric(n, cp), 0.0, 0.5 * cp.collar, cp.collar, "corollary");
  out.corner = validate_corner(out.data, opts.boundary_samples, opts.seed + 5);

  const Assembly a = assemble(out.data, opts.epsilon, opts.plan);
  out.epsilon = a.epsilon;
  out.min_input_excess = a.min_excess;
  out.scan = a.scan;
  out.lambda = a.lambda;
  out.gluing_pass = a.pass;

  const CutoffChi chi = build_chi();
  const CutoffBeta beta = build_beta();
  out.metric = hat_g(out.data, chi, beta, out.lambda);
  out.metric.name = "corollary";
  out.final_check = final_scalar_check(out.data, out.lambda, opts.plan, opts.final_samples, opts.seed);

  const Hypersurface equator = chart_sphere(n, 1.0);
  const auto feet = random_sphere_points(n, opts.boundary_samples, 1.0, opts.seed + 9);
  const auto forms = index_map(feet.size(), [&](std::size_t i) {
    const SurfaceGeometry sg = surface_geometry(out.metric, equator, feet[i]);
    double m = 0.0;
    for (int r = 0; r < sg.k; ++r)
      for (int c = 0; c < sg.k; ++c) m = std::max(m, std::abs(sg.second_form[r][c]));
    return m;
  });
  out.final_check.boundary_form = *std::max_element(forms.begin(), forms.end());
  const FinalCheck& fc = out.final_check;
  out.final_check.pass = fc.boundary_form < 1e-10 && fc.min_excess > 0.0;
  out.pass = out.final_check.pass;
  return out;
}

}  // namespace hemi
