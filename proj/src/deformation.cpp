#include "hemiglue/deformation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hemiglue/error.hpp"
#include "hemiglue/functional.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

double EvenSextic::value(double u) const noexcept {
  const double s = u * u;
  return coeffs[0] + s * (coeffs[1] + s * (coeffs[2] + s * coeffs[3]));
}

double EvenSextic::d1(double u) const noexcept {
  const double s = u * u;
  return u * (2.0 * coeffs[1] + s * (4.0 * coeffs[2] + s * 6.0 * coeffs[3]));
}

double EvenSextic::d2(double u) const noexcept {
  const double s = u * u;
  return 2.0 * coeffs[1] + s * (12.0 * coeffs[2] + s * 30.0 * coeffs[3]);
}

Jet EvenSextic::of(const Jet& u) const {
  const Jet s = u * u;
  return coeffs[0] + s * (coeffs[1] + s * (coeffs[2] + coeffs[3] * s));
}

namespace {
void require_n(int n) {
  if (n < 3 || n > kMaxDim) throw Error("unsupported-dimension", "the construction needs 3 <= n <= 5, got " + std::to_string(n));
}
}  // namespace

EvenSextic build_psi(int n) {
  require_n(n);
  const double m = n - 1.0;
  return EvenSextic{{-1.0, m / 2.0, m * (n + 1.0) / 24.0, m * (n + 1.0) * (n + 3.0) / 240.0}};
}

double psi_identity_coefficient(int n) { return (n - 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0) / 48.0; }

PsiIdentityReport check_psi_identity(int n, int samples) {
  const EvenSextic psi = build_psi(n);
  PsiIdentityReport rep;
  rep.coefficient = psi_identity_coefficient(n);
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    const double u = samples == 1 ? 0.0 : -1.0 + 2.0 * i / (samples - 1.0);
    const double lhs = equator_laplacian(u, psi.d1(u), psi.d2(u), n).laplacian + (n - 1) * psi.value(u);
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs + rep.coefficient * std::pow(u, 6)));
  }
  return rep;
}

double EtaSpec::quadratic_at(double cc) const noexcept {
  return p0 + 2.0 * (n - 1) * cc * psi_integral - (n - 1) * cc * cc * area;
}

EtaSpec choose_c(int n) { return choose_c(n, equator_rule(n, 64, true)); }

EtaSpec choose_c(int n, const QuadratureRule& equator) {
  require_n(n);
  EtaSpec spec;
  spec.n = n;
  spec.psi = build_psi(n);
  const auto u_of = [n](const Point& p) { return p[static_cast<std::size_t>(n - 1)]; };
  const auto& psi = spec.psi;
  spec.p0 = equator.integrate(
      [&](const Point& p) {
        const double u = u_of(p);
        const auto d = equator_laplacian(u, psi.d1(u), psi.d2(u), n);
        return d.grad_sq - (n - 1) * psi.value(u) * psi.value(u);
      },
      Exec::Serial);
  if (!(spec.p0 > 0.0)) throw Error("eta-construction-failed", "boundary quadratic form of psi is not positive");
  spec.psi_integral = equator.integrate([&](const Point& p) { return psi.value(u_of(p)); }, Exec::Serial);
  spec.area = equator.integrate([](const Point&) { return 1.0; }, Exec::Serial);
  const double m = n - 1.0;
  spec.threshold = (m * spec.psi_integral + std::sqrt(m * m * spec.psi_integral * spec.psi_integral + m * spec.area * spec.p0)) /
                   (m * spec.area);
  spec.c = spec.psi_integral < 0.0 ? 0.5 * spec.threshold : 1.0;
  spec.quadratic = equator.integrate(
      [&](const Point& p) {
        const double u = u_of(p);
        const double eta = spec.eta(u);
        return (1.0 - u * u) * psi.d1(u) * psi.d1(u) - (n - 1) * eta * eta;
      },
      Exec::Serial);
  spec.max_operator = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double u = -1.0 + i / 1000.0;
    const double op = equator_laplacian(u, psi.d1(u), psi.d2(u), n).laplacian + (n - 1) * spec.eta(u);
    spec.max_operator = std::max(spec.max_operator, op);
  }
  if (!(spec.quadratic > 0.0) || !(spec.max_operator < 0.0))
    throw Error("eta-construction-failed", "chosen shift does not satisfy the boundary conditions");
  return spec;
}

VectorField build_X(const EtaSpec& spec) {
  const int n = spec.n;
  return VectorField{n, [spec, n](const JetVec& y) {
                       Jet r2(y[0].dim(), y[0].order());
                       for (const auto& c : y) r2 += c * c;
                       const Jet inv = 1.0 / (1.0 + r2);
                       const Jet xn = 2.0 * y[static_cast<std::size_t>(n - 1)] * inv;
                       const Jet f = (1.0 - r2) * inv;
                       const Jet s = xn * xn;
                       const auto& a = spec.psi.coeffs;
                       const Jet dpsi = xn * (2.0 * a[1] + s * (4.0 * a[2] + 6.0 * a[3] * s));
                       const Jet eta = spec.psi.of(xn) - spec.c;
                       // grad x_n = (1+r^2)/2 e_n - y_n y and grad f = -y in the chart.
                       const Jet w = f * dpsi;
                       const Jet yn = y[static_cast<std::size_t>(n - 1)];
                       JetVec out;
                       out.reserve(static_cast<std::size_t>(n));
                       for (int i = 0; i < n; ++i) {
                         Jet comp = (eta - w * yn) * y[static_cast<std::size_t>(i)];
                         if (i == n - 1) comp += 0.5 * w * (1.0 + r2);
                         out.push_back(comp);
                       }
                       return out;
                     }};
}

BoundaryFieldCheck check_X_on_equator(const EtaSpec& spec, std::span<const double> p) {
  const int n = spec.n;
  const VectorField x = build_X(spec);
  const JetVec xs = x.eval(coordinate_jets(p, 3));
  const Connection conn = christoffel(round_metric(n), p);
  const double u = p[static_cast<std::size_t>(n - 1)];
  const double eta = spec.eta(u);
  BoundaryFieldCheck out;
  for (int k = 0; k < n; ++k) {
    out.normal_residual = std::max(out.normal_residual, std::abs(xs[k].value() - eta * p[k]));
    double dx = 0.0;
    for (int i = 0; i < n; ++i) {
      double term = xs[k].d(i);
      for (int j = 0; j < n; ++j) term += conn.gamma[k][i][j] * xs[j].value();
      dx += p[i] * term;
    }
    const double grad = spec.psi.d1(u) * ((k == n - 1 ? 1.0 : 0.0) - u * p[k]);
    out.derivative_residual = std::max(out.derivative_residual, std::abs(dx + grad));
  }
  const TensorJet lie = sample_tensor(lie_derivative_field(x, round_metric(n)), p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.lie_residual = std::max(out.lie_residual, std::abs(lie.v[i][j]));
  return out;
}

MetricField family_g0(const EtaSpec& spec, double t) {
  MetricField round = round_metric(spec.n);
  MetricField g = add_fields(round, lie_derivative_field(build_X(spec), round), t, "g0");
  return g;
}

MetricField family_g1(const EtaSpec& spec, double t, const FlowOptions& opts) {
  return pullback_field(flow_map(build_X(spec), t, opts), round_metric(spec.n), "g1");
}

GaugeSample gauge_sample(const VectorField& x, std::span<const double> p) {
  const MetricField round = round_metric(x.dim);
  GaugeSample s;
  const JetVec c = coordinate_jets(p, 3);
  s.round = TensorJet::from(round.eval(c));
  s.lie = TensorJet::from(lie_derivative_metric(x, round, c));
  return s;
}

double GaugeSample::scalar_at(double t) const {
  TensorJet m = round;
  m.axpy(t, lie);
  return curvature(m).scalar;
}

QValue compute_Q(const GaugeSample& s, double step) {
  if (!(step >= 1e-4 && step <= 1e-1)) throw Error("invalid-step", "Q step must lie in [1e-4, 1e-1]");
  const double r0 = s.scalar_at(0.0);
  const auto diffs = [&](double h, double& second, double& first) {
    const double p1 = s.scalar_at(h), m1 = s.scalar_at(-h), p2 = s.scalar_at(2 * h), m2 = s.scalar_at(-2 * h);
    second = (-p2 + 16.0 * p1 - 30.0 * r0 + 16.0 * m1 - m2) / (12.0 * h * h);
    first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
  };
  double s1, f1, s2, f2;
  diffs(step, s1, f1);
  diffs(0.5 * step, s2, f2);
  return QValue{(16.0 * s2 - s1) / 15.0, (16.0 * f2 - f1) / 15.0};
}

QValue compute_Q(const EtaSpec& spec, std::span<const double> p, double step) {
  return compute_Q(gauge_sample(build_X(spec), p), step);
}

MuResult compute_mu(const EtaSpec& spec, const QuadratureRule& hemisphere, double step) {
  if (hemisphere.target != QuadTarget::Hemisphere) throw Error("quadrature-target", "mu needs a hemisphere rule");
  const VectorField x = build_X(spec);
  const auto q = index_map(hemisphere.size(), [&](std::size_t i) { return compute_Q(gauge_sample(x, hemisphere.nodes[i]), step); });
  MuResult out;
  out.q_step = step;
  std::vector<double> qf(q.size()), f(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.q_nodes.push_back(q[i].second);
    f[i] = to_ambient(hemisphere.nodes[i]).back();
    qf[i] = q[i].second * f[i];
    out.q_sup = std::max(out.q_sup, std::abs(q[i].second));
    out.max_first = std::max(out.max_first, std::abs(q[i].first));
  }
  if (out.max_first > 1e-7) throw Error("gauge-violation", "first t-derivative of R along g0 is " + std::to_string(out.max_first));
  out.qf_integral = hemisphere.sum(qf);
  out.f_integral = hemisphere.sum(f);
  out.mu = out.qf_integral / out.f_integral;
  if (!(out.mu > 0.0)) throw Error("second-variation-nonpositive", "mu = " + std::to_string(out.mu));
  std::vector<double> rf(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) rf[i] = (out.q_nodes[i] - out.mu) * f[i];
  out.orthogonality = std::abs(hemisphere.sum(rf));
  return out;
}

std::vector<Point> zonal_grid(int n, int polar, int azimuthal) {
  // Ambient point (s, 0, ..., 0, x_n, f) with s >= 0, pulled back to the chart.
  std::vector<Point> out;
  for (int i = 0; i < polar; ++i) {
    const double phi = 0.5 * std::numbers::pi * (i + 0.5) / polar;
    for (int j = 0; j <= azimuthal; ++j) {
      const double theta = std::numbers::pi * j / azimuthal;
      const double f = std::cos(phi), xn = std::sin(phi) * std::cos(theta);
      const double s = std::sqrt(std::max(0.0, 1.0 - f * f - xn * xn));
      Point y(static_cast<std::size_t>(n), 0.0);
      y[0] = s / (1.0 + f);
      y[static_cast<std::size_t>(n - 1)] = xn / (1.0 + f);
      out.push_back(std::move(y));
    }
  }
  return out;
}

USolution solve_u(const EtaSpec& spec, const MuResult& mu, HarmonicBasis basis, const QuadratureRule& hemisphere,
                  int uniform_steps) {
  if (mu.q_nodes.size() != hemisphere.size()) throw Error("quadrature-size", "Q values do not match the rule");
  const int n = spec.n;
  USolution out;
  out.q_sup = mu.q_sup;
  const std::size_t m = basis.size();
  std::size_t f_index = m;
  for (std::size_t k = 0; k < m; ++k)
    if (basis.elements[k].degree == 1) f_index = k;
  if (f_index == m) throw Error("basis-size", "trial space does not contain the f mode");

  struct Row {
    std::vector<double> value, image;
  };
  const auto make_row = [&](std::span<const double> y) {
    const Point x = to_ambient(y);
    const double xn = x[static_cast<std::size_t>(n - 1)], xf = x[static_cast<std::size_t>(n)];
    Row r;
    r.value.resize(m);
    for (std::size_t k = 0; k < m; ++k) r.value[k] = basis.evaluate_element(k, xn, xf);
    r.image = basis.shifted_laplacian(xn, xf, n);
    return r;
  };
  const auto rows = index_map(hemisphere.size(), [&](std::size_t q) { return make_row(hemisphere.nodes[q]); });
  std::vector<double> prod(hemisphere.size());
  for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = (mu.q_nodes[q] - mu.mu) * rows[q].value[f_index];
  out.f_mode = std::abs(hemisphere.sum(prod));
  if (out.f_mode > 1e-6 * std::max(1.0, mu.q_sup))
    throw Error("kernel-obstruction", "right-hand side has an f-mode component " + std::to_string(out.f_mode));

  // Weighted least squares for (Lap + n) u = Q - mu over the trial space
  // without the kernel direction.
  const Eigen::Index rule_n = static_cast<Eigen::Index>(hemisphere.size());
  const Eigen::Index cols_n = static_cast<Eigen::Index>(m - 1);
  const auto fill = [&](Eigen::MatrixXd& a, Eigen::Index q, const Row& row, double scale) {
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (k != f_index) a(q, col++) = scale * row.image[k];
  };
  Eigen::MatrixXd a(rule_n, cols_n);
  Eigen::VectorXd rhs(rule_n);
  for (Eigen::Index q = 0; q < rule_n; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    const double scale = std::sqrt(hemisphere.weights[qi]);
    fill(a, q, rows[qi], scale);
    rhs(q) = scale * (mu.q_nodes[qi] - mu.mu);
  }
  Eigen::VectorXd sol = a.colPivHouseholderQr().solve(rhs);

  // Lawson reweighting pulls the weighted L2 fit towards the uniform one.
  Eigen::VectorXd lawson = Eigen::VectorXd::Ones(rule_n);
  for (int it = 0; it < uniform_steps; ++it) {
    const Eigen::VectorXd r = a * sol - rhs;
    Eigen::VectorXd abs_r(rule_n);
    for (Eigen::Index q = 0; q < rule_n; ++q) abs_r(q) = std::abs(r(q)) / std::sqrt(hemisphere.weights[static_cast<std::size_t>(q)]);
    if (abs_r.maxCoeff() <= 1e-13 * std::max(1.0, mu.q_sup)) break;
    lawson = lawson.cwiseProduct(abs_r);
    lawson /= lawson.sum() / static_cast<double>(rule_n);
    const Eigen::VectorXd rs = lawson.cwiseSqrt();
    sol = (rs.asDiagonal() * a).colPivHouseholderQr().solve(rs.cwiseProduct(rhs));
  }
  out.coeffs.assign(m, 0.0);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < m; ++k)
    if (k != f_index) out.coeffs[k] = sol(col++);
  out.field = basis.field(out.coeffs);
  out.basis = std::move(basis);
  return out;
}

namespace {
// Five-point second difference of a scalar function of t at 0.
template <class Fn>
double second_difference(Fn&& fn, double h) {
  return (-fn(2 * h) + 16.0 * fn(h) - 30.0 * fn(0.0) + 16.0 * fn(-h) - fn(-2 * h)) / (12.0 * h * h);
}
}  // namespace

EnergyChain energy_chain(const EtaSpec& spec, const MuResult& mu, const QuadratureRule& hemisphere,
                         const QuadratureRule& equator, double step) {
  EnergyChain out;
  out.functional_g0 =
      second_difference([&](double t) { return functional_F(family_g0(spec, t), hemisphere, equator).value; }, step);
  out.qf_integral = mu.qf_integral;
  out.functional_g1 =
      second_difference([&](double t) { return functional_F(family_g1(spec, t), hemisphere, equator).value; }, step);
  out.area_flow =
      2.0 * second_difference([&](double t) { return induced_area(family_g1(spec, t), equator); }, step);
  out.boundary_form = 2.0 * spec.quadratic;
  const double v[5] = {out.functional_g0, out.qf_integral, out.functional_g1, out.area_flow, out.boundary_form};
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      out.spread = std::max(out.spread, std::abs(v[i] - v[j]) / std::max(std::abs(v[i]), std::abs(v[j])));
  return out;
}

double pde_residual(const EtaSpec& spec, const USolution& u, double mu, const std::vector<Point>& points) {
  const MetricField round = round_metric(spec.n);
  const VectorField x = build_X(spec);
  const auto r = index_map(points.size(), [&](std::size_t i) {
    const auto hl = hessian_laplacian(u.field, round, points[i]);
    const double uv = u.field(coordinate_jets(points[i], 0)).value();
    const double q = compute_Q(gauge_sample(x, points[i])).second;
    return std::abs(hl.laplacian + spec.n * uv - (q - mu));
  });
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

MetricField family_g(const EtaSpec& spec, const ScalarField& u, double t) {
  const int n = spec.n;
  MetricField g0 = family_g0(spec, t);
  const double a = t * t / (2.0 * (n - 1));
  MetricField out = g0;
  out.name = "g";
  out.eval = [g0, u, a, n](const JetVec& y) {
    JetMatrix m = g0.eval(y);
    if (a != 0.0) {
      const Jet w = a * u(y) * round_factor(y);
      JetMatrix add(n, y[0].dim(), w.order());
      for (int i = 0; i < n; ++i) add.set(i, i, w);
      m += add;
    }
    return m;
  };
  return out;
}

std::vector<Point> interior_samples(int n, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pts = random_ball_points(n, count, 1.0, seed);
  const int shell = count / 4, boundary = count / 20;
  for (int i = 0; i < shell + boundary && i < count; ++i) {
    auto& p = pts[static_cast<std::size_t>(i)];
    double r = 0.0;
    for (double c : p) r += c * c;
    r = std::sqrt(r);
    const double target = i < shell ? 1.0 - 0.05 * unit(rng) : 1.0;
    for (double& c : p) c *= target / r;
  }
  return pts;
}

std::vector<Point> equator_samples(int n, int count, unsigned seed) { return random_sphere_points(n, count, 1.0, seed); }

Margins deformation_margins(const EtaSpec& spec, const ScalarField& u, double t, const std::vector<Point>& interior,
                            const std::vector<Point>& equator) {
  const int n = spec.n;
  const MetricField g = family_g(spec, u, t);
  const Hypersurface sigma = chart_sphere(n, 1.0);
  Margins m;
  m.t = t;
  const auto r = index_map(interior.size(), [&](std::size_t i) { return scalar_curvature(g, interior[i]) - n * (n - 1.0); });
  m.r_margin = *std::min_element(r.begin(), r.end());
  const auto h = index_map(equator.size(), [&](std::size_t i) {
    const double hm = mean_curvature(g, sigma, equator[i]);
    const Mat gv = metric_value(g, equator[i]);
    double dev = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dev = std::max(dev, std::abs(gv[a][b] - (a == b ? 1.0 : 0.0)));
    return std::make_pair(hm, dev);
  });
  m.h_margin = std::numeric_limits<double>::infinity();
  for (const auto& [hm, dev] : h) {
    m.h_margin = std::min(m.h_margin, hm);
    m.boundary_match = std::max(m.boundary_match, dev);
  }
  m.pass = m.r_margin > 0.0 && m.h_margin > 0.0 && m.boundary_match < 1e-10;
  return m;
}

std::vector<Point> margin_samples(int n, const DeformationOptions& opts) {
  // Every field here is invariant under rotations fixing x_n and f, so the
  // zonal grid resolves the margins far better than random points alone.
  std::vector<Point> out = interior_samples(n, opts.interior_samples, opts.seed);
  const std::vector<Point> zonal = zonal_grid(n, opts.zonal_polar, opts.zonal_azimuthal);
  out.insert(out.end(), zonal.begin(), zonal.end());
  return out;
}

DeformationResult build_deformation(int n, const DeformationOptions& opts) {
  require_n(n);
  DeformationResult res;
  res.spec = choose_c(n);
  const QuadratureRule rule = harmonic_rule(n, opts.basis_degree);
  res.mu = compute_mu(res.spec, rule, opts.q_step);
  res.u = solve_u(res.spec, res.mu, build_harmonic_basis(n, opts.basis_degree, TrialSpace::Dirichlet, rule), rule,
                  opts.uniform_steps);
  const std::vector<Point> interior = margin_samples(n, opts);
  res.interior_count = static_cast<int>(interior.size());
  const auto equator = equator_samples(n, opts.equator_samples, opts.seed + 1);
  int accepted = -1;
  for (int k = 0; k < opts.t_steps; ++k) {
    const double t = opts.t_start * std::ldexp(1.0, -k);
    res.scan.push_back(deformation_margins(res.spec, res.u.field, t, interior, equator));
    if (accepted < 0 && res.scan.back().pass) accepted = k;
  }
  // The R margin is a t^2 - b t^3 with b/a large, so slopes are read off two
  // halvings past the grid where the cubic term has died down.
  const double t_end = opts.t_start * std::ldexp(1.0, -opts.t_steps);
  const Margins a = deformation_margins(res.spec, res.u.field, t_end, interior, equator);
  const Margins b = deformation_margins(res.spec, res.u.field, 0.5 * t_end, interior, equator);
  res.r_slope = std::log(a.r_margin / b.r_margin) / std::log(2.0);
  res.h_slope = std::log(a.h_margin / b.h_margin) / std::log(2.0);
  res.slope_t = {t_end, 0.5 * t_end};
  if (accepted < 0) throw Error("deformation-failed", "no t on the grid satisfies all three margins");
  res.accepted = res.scan[static_cast<std::size_t>(accepted)];
  res.t = res.accepted.t;
  res.metric = family_g(res.spec, res.u.field, res.t);
  return res;
}

}  // namespace hemi
