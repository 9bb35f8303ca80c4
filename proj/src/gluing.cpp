#include "hemiglue/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "hemiglue/error.hpp"
#include "hemiglue/parallel.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

namespace {

// Below this rho the inner branch switches from gt - lambda rho beta N to
// the foot-point tensor, since N / rho loses digits.
constexpr double kResolvedRho = 1e-6;
// Below this rho samples are placed on the boundary with a rho shift.
constexpr double kVirtualRho = 1e-9;

void check_lambda(double lambda) {
  if (!(lambda >= 1.0 && lambda <= kMaxLambda))
    throw Error("lambda-unrepresentable", "lambda must lie in [1, 15], got " + std::to_string(lambda));
}

int field_order(const CornerData& d) { return std::max({2, d.g.input_order, d.gt.input_order}); }

Jet constant_like(const Jet& j, double v) { return Jet(j.dim(), j.order(), v); }

// Derivatives of beta at s (orders 0..2).
std::array<double, 3> beta_derivs(const CutoffBeta& beta, double s) {
  const double p[1] = {s};
  const Jet b = beta.of(Jet::coordinate(1, 0, p, 2));
  return {b.value(), b.d(0), b.d(0, 0)};
}

// G(rho) = lambda rho^2 beta(log(rho) / lambda^2), composed on a second-order
// rho jet with closed-form derivatives so nothing of size 1/rho appears.
Jet inner_weight(const Jet& rho, double lambda, const CutoffBeta& beta) {
  const double r = rho.value();
  const auto b = beta_derivs(beta, std::log(r) / (lambda * lambda));
  const double g0 = lambda * r * r * b[0];
  const double g1 = 2.0 * lambda * r * b[0] + r * b[1] / lambda;
  const double g2 = 2.0 * lambda * b[0] + 3.0 * b[1] / lambda + b[2] / (lambda * lambda * lambda);
  return rho.truncated(2).compose(g0, g1, g2, 0.0);
}

Point foot_of(const CornerData& d, const JetVec& y) { return d.foot(values(y)); }

// T(b) + dT(b) (y - b) as jets in y.
JetMatrix foot_model(const CornerData& d, const JetVec& y) {
  const FootTensor ft = foot_tensor(d, foot_of(d, y));
  const int n = d.n;
  JetMatrix out(n, y[0].dim(), y[0].order());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet e = constant_like(y[0], ft.value[i][j]);
      for (int l = 0; l < n; ++l) e += ft.grad[l][i][j] * (y[l] - ft.base[l]);
      out.set(i, j, e);
    }
  return out;
}

// With a shift the field is sampled at a boundary point, so rho's value is
// replaced by the shift; rounding in rho there would swamp shifts below 1e-16.
double rho_at(const CornerData& d, std::span<const double> p, double shift) {
  return shift > 0.0 ? shift : d.rho_value(p);
}
Jet rho_jet(const CornerData& d, const JetVec& y, double shift) {
  Jet r = d.rho(y);
  if (shift > 0.0) r.set_value(shift);
  return r;
}

Branch select(double r, double lambda, double cut_end) {
  if (r >= cut_end) return Branch::Base;
  if (r <= std::exp(-2.0 * lambda * lambda)) return Branch::Tilde;
  if (r >= std::exp(-lambda * lambda)) return Branch::Outer;
  return Branch::Inner;
}

JetMatrix glued(const CornerData& d, const CutoffChi& chi, const CutoffBeta& beta, double lambda, double shift,
                std::optional<Branch> forced, const JetVec& y) {
  const double r = rho_at(d, values(y), shift);
  const Branch br = forced ? *forced : select(r, lambda, d.cut_end);
  if (br == Branch::Base) return d.g.eval(y);
  const Jet rho = rho_jet(d, y, shift);

  if (shift > 0.0) {
    // Shifted sample: everything is expressed through the foot tensor.
    const JetMatrix tb = foot_model(d, y);
    Jet weight = rho;
    if (br == Branch::Outer) weight = rho * chi.ratio(lambda * rho);
    if (br == Branch::Inner) weight = rho.truncated(2) - inner_weight(rho, lambda, beta);
    return d.g.eval(y) + weight * tb;
  }

  const bool core = r <= d.cut_start;  // zeta == 1, so gt = g + rho T
  switch (br) {
    case Branch::Tilde:
      if (core || r <= 0.0) return d.gt.eval(y);
      return d.g.eval(y) + d.cut(y) * (d.gt.eval(y) - d.g.eval(y));
    case Branch::Outer: {
      const JetMatrix g = d.g.eval(y);
      return g + (chi.ratio(lambda * rho) * d.cut(y)) * (d.gt.eval(y) - g);
    }
    case Branch::Inner: {
      if (r < kResolvedRho) return d.gt.eval(y) - inner_weight(rho, lambda, beta) * foot_model(d, y);
      const Jet lb = lambda * rho * beta.of(log(rho) / (lambda * lambda));
      const JetMatrix g = d.g.eval(y), gt = d.gt.eval(y);
      if (core) return gt - lb * (gt - g);
      return g + ((1.0 - lb) * d.cut(y)) * (gt - g);
    }
    default:
      return d.g.eval(y);
  }
}

MetricField glued_field(const CornerData& d, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                        double shift, std::optional<Branch> forced) {
  check_lambda(lambda);
  MetricField out;
  out.dim = d.n;
  out.input_order = field_order(d);
  out.domain = d.g.domain;
  out.name = "glued";
  out.eval = [d, chi, beta, lambda, shift, forced](const JetVec& y) {
    return glued(d, chi, beta, lambda, shift, forced, y);
  };
  return out;
}

// min over boundary-adapted quantities of |grad rho|^2 tr T - T(grad rho, grad rho).
double a_coefficient(const Mat& metric, const Mat& t, const Point& grad_rho, int n) {
  const Mat inv = spd_inverse(metric, n);
  Point up(static_cast<std::size_t>(n), 0.0);
  double norm = 0.0, trace = 0.0, tt = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      up[i] += inv[i][j] * grad_rho[j];
      trace += inv[i][j] * t[i][j];
    }
  for (int i = 0; i < n; ++i) norm += up[i] * grad_rho[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tt += t[i][j] * up[i] * up[j];
  return norm * trace - tt;
}

Point rho_gradient(const CornerData& d, std::span<const double> p) {
  const Jet r = d.rho(coordinate_jets(p, 1));
  Point g(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) g[i] = r.d(i);
  return g;
}

double max_diff(const TensorJet& a, const TensorJet& b, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m = std::max(m, std::abs(a.v[i][j] - b.v[i][j]));
      for (int k = 0; k < n; ++k) {
        m = std::max(m, std::abs(a.d1[k][i][j] - b.d1[k][i][j]));
        for (int l = 0; l < n; ++l) m = std::max(m, std::abs(a.d2[k][l][i][j] - b.d2[k][l][i][j]));
      }
    }
  return m;
}

double outer_upper(const CornerData& d, const SamplePlan& plan) {
  const double hi = plan.outer_max > 0.0 ? plan.outer_max : 1.5 * d.cut_end;
  return std::min(hi, 0.9 * d.rho_max);
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::Base: return "base";
    case Branch::Outer: return "outer";
    case Branch::Inner: return "inner";
    case Branch::Tilde: return "tilde";
  }
  return "?";
}

CornerData radial_corner(int n, MetricField g, MetricField gt, double boundary_height, double cut_start,
                         double cut_end, std::string label) {
  if (!(boundary_height >= 0.0 && boundary_height < 1.0))
    throw Error("invalid-corner", "boundary height must lie in [0, 1)");
  if (!(cut_start > kResolvedRho && cut_start < cut_end))
    throw Error("invalid-corner", "need 1e-6 < cut_start < cut_end");
  const double base = std::asin(boundary_height);
  const double rb = std::sqrt((1.0 - boundary_height) / (1.0 + boundary_height));
  CornerData d;
  d.n = n;
  d.g = std::move(g);
  d.gt = std::move(gt);
  d.rho = [base](const JetVec& y) { return asin(height(y)) - base; };
  d.rho_value = [base](std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::asin((1.0 - s) / (1.0 + s)) - base;
  };
  d.rho_max = 0.5 * std::numbers::pi - base;
  d.cut_start = cut_start;
  d.cut_end = cut_end;
  d.cut = [base, cut_start, cut_end](const JetVec& y) {
    const Jet r = asin(height(y)) - base;
    return 1.0 - smoothstep((r - cut_start) / (cut_end - cut_start));
  };
  d.boundary = chart_sphere(n, rb);
  d.foot = [rb](std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    if (s == 0.0) throw Error("invalid-corner", "no foot point at the chart origin");
    Point b(p.begin(), p.end());
    for (double& v : b) v *= rb / std::sqrt(s);
    return b;
  };
  d.along_normal = [base](std::span<const double> b, double rho) {
    const double f = std::sin(base + rho);
    const double r = std::sqrt((1.0 - f) / (1.0 + f));
    double s = 0.0;
    for (double v : b) s += v * v;
    Point p(b.begin(), b.end());
    for (double& v : p) v *= r / std::sqrt(s);
    return p;
  };
  d.boundary_samples = [n, rb](int count, unsigned seed) { return random_sphere_points(n, count, rb, seed); };
  d.interior_samples = [n, rb](int count, unsigned seed) { return random_ball_points(n, count, rb, seed); };
  d.label = std::move(label);
  return d;
}

FootTensor foot_tensor(const CornerData& data, std::span<const double> b) {
  const int n = data.n;
  const JetVec c = coordinate_jets(b, field_order(data));
  const JetMatrix diff = data.gt.eval(c) - data.g.eval(c);
  const Jet rho = data.rho(c);
  double w[kMaxDim]{}, hw[kMaxDim]{};
  double ww = 0.0, whw = 0.0;
  for (int k = 0; k < n; ++k) {
    w[k] = rho.d(k);
    ww += w[k] * w[k];
  }
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) hw[l] += w[k] * rho.d(k, l);
  for (int l = 0; l < n; ++l) whw += hw[l] * w[l];

  FootTensor out;
  out.base.assign(b.begin(), b.end());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet& e = diff(i, j);
      double wn = 0.0, wnw = 0.0, wn2[kMaxDim]{};
      for (int k = 0; k < n; ++k) {
        wn += w[k] * e.d(k);
        for (int l = 0; l < n; ++l) wn2[l] += w[k] * e.d(k, l);
      }
      for (int l = 0; l < n; ++l) wnw += wn2[l] * w[l];
      const double t = wn / ww;
      const double normal_slope = (wnw - whw * t) / (2.0 * ww);
      out.value[i][j] = out.value[j][i] = t;
      for (int l = 0; l < n; ++l) out.grad[l][i][j] = out.grad[l][j][i] = (wn2[l] - hw[l] * t - w[l] * normal_slope) / ww;
    }
  return out;
}

Mat corner_tensor(const CornerData& data, std::span<const double> p) {
  const int n = data.n;
  const double r = data.rho_value(p);
  Mat out{};
  if (r >= data.cut_end) return out;
  if (r < kResolvedRho) {
    const FootTensor ft = foot_tensor(data, data.foot(p));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        out[i][j] = ft.value[i][j];
        for (int l = 0; l < n; ++l) out[i][j] += ft.grad[l][i][j] * (p[l] - ft.base[l]);
      }
    return out;
  }
  const Mat g = metric_value(data.g, p), gt = metric_value(data.gt, p);
  const double z = data.cut(coordinate_jets(p, 0)).value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = z * (gt[i][j] - g[i][j]) / r;
  return out;
}

CornerReport check_corner(const CornerData& data, int samples, unsigned seed) {
  const int n = data.n;
  const auto pts = data.boundary_samples(samples, seed);
  struct Row {
    double mismatch, rho, grad, trace, gap, gap_res, form_res, a, ident;
  };
  const auto rows = index_map(pts.size(), [&](std::size_t s) {
    const Point& b = pts[s];
    Row row{};
    const Mat g = metric_value(data.g, b), gt = metric_value(data.gt, b);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.mismatch = std::max(row.mismatch, std::abs(gt[i][j] - g[i][j]));
    row.rho = std::abs(data.rho_value(b));
    const Point dr = rho_gradient(data, b);
    const Mat inv = spd_inverse(g, n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) norm += inv[i][j] * dr[i] * dr[j];
    row.grad = std::abs(std::sqrt(norm) - 1.0);

    const FootTensor ft = foot_tensor(data, b);
    const SurfaceGeometry sg = surface_geometry(data.g, data.boundary, b);
    const SurfaceGeometry st = surface_geometry(data.gt, data.boundary, b);
    const int k = sg.k;
    const auto t_of = [&](const Point& u, const Point& v) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += ft.value[i][j] * u[i] * v[j];
      return s;
    };
    for (int a = 0; a < k; ++a) row.trace += t_of(sg.frame[a], sg.frame[a]);
    row.gap = sg.mean_curvature - st.mean_curvature;
    row.gap_res = std::abs(row.gap - 0.5 * row.trace);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c)
        row.form_res = std::max(row.form_res, std::abs(st.second_form_frame[a][c] - sg.second_form_frame[a][c] +
                                                       0.5 * t_of(sg.frame[a], sg.frame[c])));
    row.a = a_coefficient(g, ft.value, dr, n);

    // g + rho T against gt along the normal inside the region where zeta = 1.
    for (double frac : {1e-3, 0.1, 0.5, 0.9}) {
      const double rho = frac * data.cut_start;
      const Point p = data.along_normal(b, rho);
      const Mat tp = corner_tensor(data, p);
      const Mat gp = metric_value(data.g, p), gtp = metric_value(data.gt, p);
      const double rp = data.rho_value(p);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) row.ident = std::max(row.ident, std::abs(gp[i][j] + rp * tp[i][j] - gtp[i][j]));
    }
    return row;
  });
  CornerReport rep;
  rep.samples = static_cast<int>(pts.size());
  rep.min_trace = rep.min_gap = rep.a_estimate = std::numeric_limits<double>::infinity();
  for (const Row& r : rows) {
    rep.boundary_mismatch = std::max(rep.boundary_mismatch, r.mismatch);
    rep.rho_value = std::max(rep.rho_value, r.rho);
    rep.grad_rho_error = std::max(rep.grad_rho_error, r.grad);
    rep.min_trace = std::min(rep.min_trace, r.trace);
    rep.min_gap = std::min(rep.min_gap, r.gap);
    rep.gap_residual = std::max(rep.gap_residual, r.gap_res);
    rep.second_form_residual = std::max(rep.second_form_residual, r.form_res);
    rep.a_estimate = std::min(rep.a_estimate, r.a);
    rep.identity_residual = std::max(rep.identity_residual, r.ident);
  }
  return rep;
}

CornerReport validate_corner(const CornerData& data, int samples, unsigned seed) {
  const CornerReport r = check_corner(data, samples, seed);
  if (r.boundary_mismatch > 1e-10)
    throw Error("corner-mismatch", "metrics differ on the boundary by " + std::to_string(r.boundary_mismatch));
  if (!(r.min_gap > 0.0))
    throw Error("mean-curvature-gap-violated", "min H_g - H_gt = " + std::to_string(r.min_gap));
  return r;
}

MetricField hat_g(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                  double rho_shift) {
  return glued_field(data, chi, beta, lambda, rho_shift, std::nullopt);
}

MetricField hat_g_branch(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda, Branch b,
                         double rho_shift) {
  return glued_field(data, chi, beta, lambda, rho_shift, b);
}

MetricField shifted_tilde(const CornerData& data, double rho_shift) {
  MetricField out;
  out.dim = data.n;
  out.input_order = field_order(data);
  out.domain = data.g.domain;
  out.name = "shifted-tilde";
  out.eval = [data, rho_shift](const JetVec& y) {
    return data.g.eval(y) + rho_jet(data, y, rho_shift) * foot_model(data, y);
  };
  return out;
}

Branch branch_at(const CornerData& data, double lambda, std::span<const double> p, double rho_shift) {
  return select(rho_at(data, p, rho_shift), lambda, data.cut_end);
}

std::vector<GlueSample> glue_samples(const CornerData& data, double lambda, const SamplePlan& plan) {
  std::vector<GlueSample> out;
  const auto feet = data.boundary_samples(plan.boundary_points, plan.seed);
  const auto place = [&](const Point& b, double rho, bool inner) {
    GlueSample s;
    s.rho = rho;
    s.inner = inner;
    if (rho < kVirtualRho) {
      s.point = b;
      s.shift = rho;
    } else {
      s.point = data.along_normal(b, rho);
    }
    out.push_back(std::move(s));
  };
  const double lo = std::exp(-lambda * lambda);
  const double span = outer_upper(data, plan);
  const double hi = std::max(span, lo);
  for (const Point& b : feet) {
    for (int k = 0; k < plan.outer_shells; ++k) {
      const double f = plan.outer_shells == 1 ? 0.0 : static_cast<double>(k) / (plan.outer_shells - 1);
      place(b, std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))), false);
    }
    for (int k = 0; k < plan.collar_shells; ++k) place(b, span * (k + 0.5) / plan.collar_shells, false);
    for (int k = 0; k < plan.inner_shells; ++k) {
      const double f = plan.inner_shells == 1 ? 0.5 : static_cast<double>(k) / (plan.inner_shells - 1);
      place(b, std::exp(lambda * lambda * (-2.0 + f)), true);
    }
  }
  // The right end of the inner range is the seam; keep it strictly inside.
  for (GlueSample& s : out)
    if (s.inner && s.rho >= lo) {
      s.rho = lo * (1.0 - 1e-12);
      if (s.shift > 0.0) s.shift = s.rho;
      else s.point = data.along_normal(data.foot(s.point), s.rho);
    }
  for (const Point& p : data.interior_samples(plan.interior_points, plan.seed + 1)) {
    GlueSample s;
    s.point = p;
    s.rho = data.rho_value(p);
    out.push_back(std::move(s));
  }
  return out;
}

double seam_residual(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                     const SamplePlan& plan) {
  const double lo = std::exp(-lambda * lambda);
  const double hi = std::min(0.5 / lambda, data.cut_start);
  if (lo >= hi) return 0.0;
  const auto feet = data.boundary_samples(plan.boundary_points, plan.seed + 2);
  constexpr int kShells = 8;
  const int order = field_order(data);
  const auto res = index_map(feet.size() * kShells, [&](std::size_t idx) {
    const Point& b = feet[idx / kShells];
    const double f = static_cast<double>(idx % kShells) / (kShells - 1);
    const double rho = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    const double shift = rho < kVirtualRho ? rho : 0.0;
    const Point p = shift > 0.0 ? b : data.along_normal(b, rho);
    const JetVec c = coordinate_jets(p, order);
    const TensorJet outer = TensorJet::from(glued(data, chi, beta, lambda, shift, Branch::Outer, c));
    const TensorJet inner = TensorJet::from(glued(data, chi, beta, lambda, shift, Branch::Inner, c));
    return max_diff(outer, inner, data.n);
  });
  return *std::max_element(res.begin(), res.end());
}

GlueReport verify_glued_lower_bound(const CornerData& data, const CutoffChi& chi, const CutoffBeta& beta, double lambda,
                                    double epsilon, const SamplePlan& plan) {
  check_lambda(lambda);
  const int n = data.n;
  const auto samples = glue_samples(data, lambda, plan);
  const MetricField plain = hat_g(data, chi, beta, lambda);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  struct Row {
    double outer = kInf, inner = kInf, bound = kInf, deficit = 0.0, structure = 0.0;
  };
  const auto rows = index_map(samples.size(), [&](std::size_t idx) {
    const GlueSample& s = samples[idx];
    Row row;
    const Branch br = branch_at(data, lambda, s.point, s.shift);
    const MetricField glued_metric = s.shift > 0.0 ? hat_g(data, chi, beta, lambda, s.shift) : plain;
    const double r_hat = scalar_curvature(glued_metric, s.point);
    const double r_g = scalar_curvature(data.g, s.point);
    const bool shell = s.inner || s.shift > 0.0 || s.rho < data.cut_end;
    double r_gt = r_g;
    if (shell) {
      const MetricField tilde = s.shift > 0.0 ? shifted_tilde(data, s.shift) : data.gt;
      r_gt = scalar_curvature(tilde, s.point);
      row.bound = r_hat - std::min(r_g, r_gt);
    }
    if (br == Branch::Base || br == Branch::Outer) {
      row.outer = r_hat - r_g;
      if (br == Branch::Outer) {
        Mat t = s.shift > 0.0 ? foot_tensor(data, s.point).value : corner_tensor(data, s.point);
        const double a = a_coefficient(metric_value(data.g, s.point), t, rho_gradient(data, s.point), n);
        row.structure = std::abs(r_hat - r_g + lambda * chi.d2(lambda * s.rho) * a);
      }
    } else {
      row.inner = r_hat - r_gt;
      if (br == Branch::Inner && s.rho <= data.cut_start) {
        const MetricField tilde = s.shift > 0.0 ? shifted_tilde(data, s.shift) : data.gt;
        Mat t = s.shift > 0.0 ? foot_tensor(data, s.point).value : corner_tensor(data, s.point);
        const double a = a_coefficient(metric_value(tilde, s.point), t, rho_gradient(data, s.point), n);
        const double b = beta.value(std::log(s.rho) / (lambda * lambda));
        row.deficit = std::abs(r_hat - r_gt - 2.0 * lambda * b * a);
      }
    }
    return row;
  });
  GlueReport rep;
  rep.lambda = lambda;
  rep.epsilon = epsilon;
  rep.samples = static_cast<int>(samples.size());
  double outer = kInf, inner = kInf, bound = kInf;
  for (const Row& r : rows) {
    outer = std::min(outer, r.outer);
    inner = std::min(inner, r.inner);
    bound = std::min(bound, r.bound);
    rep.inner_deficit = std::max(rep.inner_deficit, r.deficit);
    rep.outer_structure = std::max(rep.outer_structure, r.structure);
  }
  rep.outer_margin = outer == kInf ? 0.0 : outer;
  rep.inner_margin = inner == kInf ? 0.0 : inner;
  rep.bound_margin = bound == kInf ? 0.0 : bound;

  const auto feet = data.boundary_samples(plan.boundary_points, plan.seed);
  rep.a_estimate = kInf;
  for (const Point& b : feet)
    rep.a_estimate = std::min(
        rep.a_estimate, a_coefficient(metric_value(data.g, b), foot_tensor(data, b).value, rho_gradient(data, b), n));
  rep.seam_residual = seam_residual(data, chi, beta, lambda, plan);
  rep.pass = rep.outer_margin >= -epsilon && rep.inner_margin >= -epsilon;
  return rep;
}

LambdaScan scan_lambda(const CornerData& data, double epsilon, const std::vector<double>& lambdas,
                       const SamplePlan& plan) {
  for (double l : lambdas) check_lambda(l);
  const CutoffChi chi = build_chi();
  const CutoffBeta beta = build_beta();
  LambdaScan out;
  out.rows = index_map(lambdas.size(),
                       [&](std::size_t i) { return verify_glued_lower_bound(data, chi, beta, lambdas[i], epsilon, plan); });
  for (const GlueReport& r : out.rows)
    if (r.pass) {
      out.lambda = r.lambda;
      break;
    }
  // Least-squares slope of log(deficit) against log(lambda) for lambda >= 2.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const GlueReport& r : out.rows) {
    if (r.lambda < 2.0 || !(r.inner_deficit > 0.0)) continue;
    const double x = std::log(r.lambda), y = std::log(r.inner_deficit);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) out.inner_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

LambdaScan find_lambda(const CornerData& data, double epsilon, const SamplePlan& plan) {
  if (!(epsilon > 0.0)) throw Error("invalid-epsilon", "epsilon must be positive");
  std::vector<double> lambdas;
  for (int l = 1; l <= static_cast<int>(kMaxLambda); ++l) lambdas.push_back(l);
  LambdaScan scan = scan_lambda(data, epsilon, lambdas, plan);
  if (scan.lambda == 0.0) {
    std::ostringstream os;
    os.precision(6);
    os << "no lambda <= 15 reaches epsilon " << epsilon << "; lambda outer inner:";
    for (const GlueReport& r : scan.rows) os << " [" << r.lambda << ' ' << r.outer_margin << ' ' << r.inner_margin << ']';
    throw Error("epsilon-unachievable-at-desk-scale", os.str());
  }
  return scan;
}

std::vector<RayRow> normal_ray(const CornerData& data, double lambda, std::span<const double> b, int count) {
  check_lambda(lambda);
  const CutoffChi chi = build_chi();
  const CutoffBeta beta = build_beta();
  const double lo = 0.5 * std::exp(-2.0 * lambda * lambda);
  const double hi = std::min(1.5 * data.cut_end, 0.9 * data.rho_max);
  const Point foot(b.begin(), b.end());
  return index_map(static_cast<std::size_t>(count), [&](std::size_t i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    RayRow row;
    row.rho = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    const double shift = row.rho < kVirtualRho ? row.rho : 0.0;
    const Point p = shift > 0.0 ? foot : data.along_normal(foot, row.rho);
    row.branch = branch_at(data, lambda, p, shift);
    row.r_hat = scalar_curvature(hat_g(data, chi, beta, lambda, shift), p);
    row.r_g = scalar_curvature(data.g, p);
    row.r_gt = scalar_curvature(shift > 0.0 ? shifted_tilde(data, shift) : data.gt, p);
    return row;
  });
}

}  // namespace hemi
