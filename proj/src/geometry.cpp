#include "hemiglue/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hemiglue/error.hpp"

namespace hemi {

JetMatrix MetricField::at(std::span<const double> p) const { return eval(coordinate_jets(p, input_order)); }

namespace {

void check_domain(const MetricField& g, std::span<const double> p) {
  if (g.domain && !g.domain(p)) throw Error("outside-domain", "point outside the domain of " + g.name);
}

}  // namespace

TensorJet sample_tensor(const MetricField& h, std::span<const double> p) { return TensorJet::from(h.at(p)); }

TensorJet sample_metric(const MetricField& g, std::span<const double> p) {
  check_domain(g, p);
  TensorJet t = TensorJet::from(g.at(p));
  if (!(min_eigenvalue(t.value(), t.n) > 0.0)) throw Error("metric-singular", "metric " + g.name + " is not positive definite");
  return t;
}

Mat metric_value(const MetricField& g, std::span<const double> p) {
  const JetMatrix m = g.eval(coordinate_jets(p, std::max(0, g.input_order - 2)));
  Mat out{};
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) out[i][j] = m(i, j).value();
  return out;
}

Connection christoffel(const MetricField& g, std::span<const double> p) { return levi_civita(sample_metric(g, p)); }

CurvatureData curvature_at(const MetricField& g, std::span<const double> p) { return curvature(sample_metric(g, p)); }

double scalar_curvature(const MetricField& g, std::span<const double> p) { return curvature_at(g, p).scalar; }

JetMatrix lie_derivative_metric(const VectorField& x, const MetricField& g, const JetVec& coords) {
  const int n = g.dim;
  const JetVec xs = x.eval(coords);
  const JetMatrix gm = g.eval(coords);
  int order = gm.order();
  for (const auto& c : xs) order = std::min(order, c.order());
  if (order < 1) throw Error("order-too-low", "Lie derivative of a metric needs first derivatives");
  const int dim = coords.front().dim();
  JetMatrix out(n, dim, order - 1);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet acc(dim, order - 1);
      for (int k = 0; k < n; ++k) {
        acc += xs[k] * gm(i, j).partial(k);
        acc += gm(k, j) * xs[k].partial(i);
        acc += gm(i, k) * xs[k].partial(j);
      }
      out.set(i, j, acc);
    }
  return out;
}

MetricField lie_derivative_field(const VectorField& x, const MetricField& g) {
  MetricField out;
  out.dim = g.dim;
  out.input_order = 3;
  out.domain = g.domain;
  out.name = "lie(" + g.name + ")";
  out.eval = [x, g](const JetVec& c) { return lie_derivative_metric(x, g, c); };
  return out;
}

HessianLaplacian hessian_laplacian(const ScalarField& u, const MetricField& g, std::span<const double> p) {
  const Connection c = christoffel(g, p);
  return hessian_laplacian(c, u(coordinate_jets(p, 2)));
}

JetMatrix pullback_metric(const JetVec& phi, const MetricField& g) {
  const int n = g.dim;
  const int dim = phi.front().dim();
  int order = kMaxOrder;
  for (const auto& c : phi) order = std::min(order, c.order());
  if (order < 1) throw Error("order-too-low", "pullback needs the differential of the map");

  Eigen::MatrixXd jac(n, dim);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < dim; ++i) jac(a, i) = phi[a].d(i);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-14 * sv(0))) {
    throw Error("pullback-degenerate", "map differential is not invertible");
  }

  std::vector<JetVec> dphi(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < dim; ++i) dphi[a].push_back(phi[a].partial(i));
  const JetMatrix gm = g.eval(phi);
  JetMatrix out(dim, dim, order - 1);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      Jet acc(dim, order - 1);
      for (int a = 0; a < n; ++a) {
        Jet inner(dim, order - 1);
        for (int b = 0; b < n; ++b) inner += gm(a, b) * dphi[b][j];
        acc += dphi[a][i] * inner;
      }
      out.set(i, j, acc);
    }
  return out;
}

MetricField pullback_field(const ChartMap& phi, const MetricField& g, std::string name) {
  MetricField out;
  out.dim = g.dim;
  out.input_order = 3;
  out.name = std::move(name);
  out.eval = [phi, g](const JetVec& c) { return pullback_metric(phi(c), g); };
  return out;
}

double linearized_scalar(const MetricField& g, const MetricField& h, std::span<const double> p) {
  return linearized_scalar(curvature_at(g, p), sample_tensor(h, p));
}

double perturbed_scalar(const MetricField& g, const MetricField& h, std::span<const double> p) {
  return perturbed_scalar(curvature_at(g, p), sample_tensor(h, p));
}

MetricField add_fields(const MetricField& g, const MetricField& h, double c, std::string name) {
  MetricField out;
  out.dim = g.dim;
  out.input_order = std::max(g.input_order, h.input_order);
  out.domain = g.domain;
  out.name = std::move(name);
  out.eval = [g, h, c](const JetVec& x) {
    JetMatrix m = g.eval(x);
    if (c != 0.0) m += c * h.eval(x);
    return m;
  };
  return out;
}

namespace {

JetVec axpy(const JetVec& y, double h, const JetVec& k) {
  JetVec out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * k[i];
  return out;
}

void check_flow_domain(const JetVec& y, const FlowOptions& opts) {
  const auto v = values(y);
  bool ok = true;
  for (double c : v) ok = ok && std::isfinite(c);
  if (ok && opts.domain) ok = opts.domain(v);
  if (!ok) throw Error("flow-escape", "trajectory left the chart domain");
}

JetVec integrate(const VectorField& x, JetVec y, double t, int steps, const FlowOptions& opts) {
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    const JetVec k1 = x.eval(y);
    const JetVec y2 = axpy(y, 0.5 * h, k1);
    check_flow_domain(y2, opts);
    const JetVec k2 = x.eval(y2);
    const JetVec y3 = axpy(y, 0.5 * h, k2);
    check_flow_domain(y3, opts);
    const JetVec k3 = x.eval(y3);
    const JetVec y4 = axpy(y, h, k3);
    check_flow_domain(y4, opts);
    const JetVec k4 = x.eval(y4);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_flow_domain(y, opts);
  }
  return y;
}

double max_coeff_diff(const JetVec& a, const JetVec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ca = a[i].coefficients();
    const auto cb = b[i].coefficients();
    for (std::size_t k = 0; k < ca.size(); ++k) m = std::max(m, std::abs(ca[k] - cb[k]));
  }
  return m;
}

}  // namespace

FlowResult flow(const VectorField& x, const JetVec& start, double t, const FlowOptions& opts) {
  FlowResult r;
  if (t == 0.0) {
    r.map = start;
  } else {
    int steps = std::max(1, opts.initial_steps);
    JetVec coarse = integrate(x, start, t, steps, opts);
    for (;;) {
      JetVec fine = integrate(x, start, t, 2 * steps, opts);
      steps *= 2;
      const double diff = max_coeff_diff(coarse, fine);
      coarse = std::move(fine);
      if (diff < opts.tolerance || steps >= opts.max_steps) break;
    }
    r.map = std::move(coarse);
    r.steps = steps;
  }
  r.point = values(r.map);
  const int n = static_cast<int>(r.map.size());
  if (r.map.front().order() >= 1)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) r.jacobian[a][i] = r.map[a].d(i);
  return r;
}

FlowResult flow(const VectorField& x, std::span<const double> p, double t, int order, const FlowOptions& opts) {
  return flow(x, coordinate_jets(p, order), t, opts);
}

ChartMap flow_map(const VectorField& x, double t, FlowOptions opts) {
  return [x, t, opts](const JetVec& c) { return flow(x, c, t, opts).map; };
}

std::vector<Point> orthonormal_complement(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  double nv = 0.0;
  for (double c : v) nv += c * c;
  nv = std::sqrt(nv);
  std::vector<Point> basis{Point(v.begin(), v.end())};
  for (double& c : basis[0]) c /= nv;
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    Point e(static_cast<std::size_t>(n), 0.0);
    e[i] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        double dot = 0.0;
        for (int k = 0; k < n; ++k) dot += e[k] * b[k];
        for (int k = 0; k < n; ++k) e[k] -= dot * b[k];
      }
    double ne = 0.0;
    for (double c : e) ne += c * c;
    ne = std::sqrt(ne);
    if (ne < 1e-3) continue;
    for (double& c : e) c /= ne;
    basis.push_back(std::move(e));
  }
  basis.erase(basis.begin());
  return basis;
}

Hypersurface chart_sphere(int dim, double radius) {
  Hypersurface s;
  s.dim = dim;
  s.local_embedding = [dim, radius](std::span<const double> p, const JetVec& params) {
    double np = 0.0;
    for (double c : p) np += c * c;
    np = std::sqrt(np);
    Point dir(p.begin(), p.end());
    for (double& c : dir) c /= np;
    const auto tangents = orthonormal_complement(dir);
    const int pd = params.front().dim();
    const int po = params.front().order();
    JetVec v;
    for (int m = 0; m < dim; ++m) {
      Jet c(pd, po, dir[m]);
      for (int a = 0; a < dim - 1; ++a) c += tangents[a][m] * params[a];
      v.push_back(c);
    }
    Jet norm2(pd, po);
    for (const auto& c : v) norm2 += c * c;
    const Jet scale = radius / sqrt(norm2);
    for (auto& c : v) c *= scale;
    return v;
  };
  s.outward = [](std::span<const double> p) { return Point(p.begin(), p.end()); };
  return s;
}

SurfaceGeometry surface_geometry(const MetricField& g, const Hypersurface& s, std::span<const double> p) {
  const int n = s.dim;
  const int k = n - 1;
  SurfaceGeometry out;
  out.k = k;
  const Point zero(static_cast<std::size_t>(k), 0.0);
  const JetVec emb = s.local_embedding(p, coordinate_jets(zero, 2));
  const Point base = values(emb);
  const Connection c = christoffel(g, base);

  auto gdot = [&](const Point& a, const Point& b) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc += c.g[i][j] * a[i] * b[j];
    return acc;
  };

  out.tangent.assign(static_cast<std::size_t>(k), Point(static_cast<std::size_t>(n)));
  for (int a = 0; a < k; ++a)
    for (int m = 0; m < n; ++m) out.tangent[a][m] = emb[m].d(a);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) out.induced[a][b] = gdot(out.tangent[a], out.tangent[b]);

  // g-orthonormal frame of the tangent space, ascending Gram-Schmidt
  for (int a = 0; a < k; ++a) {
    Point e = out.tangent[a];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& f : out.frame) {
        const double d = gdot(e, f);
        for (int m = 0; m < n; ++m) e[m] -= d * f[m];
      }
    const double ne = std::sqrt(gdot(e, e));
    if (!(ne > 1e-12)) throw Error("degenerate-frame", "hypersurface tangent vectors are degenerate");
    for (double& x : e) x /= ne;
    out.frame.push_back(std::move(e));
  }

  Point nu = s.outward(base);
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& f : out.frame) {
      const double d = gdot(nu, f);
      for (int m = 0; m < n; ++m) nu[m] -= d * f[m];
    }
  const double nn = std::sqrt(gdot(nu, nu));
  if (!(nn > 1e-12)) throw Error("degenerate-frame", "outward vector is tangent to the hypersurface");
  for (double& x : nu) x /= nn;
  out.normal = nu;

  // A(E_a,E_b) = -g(d_a d_b F + Gamma(E_a,E_b), nu)
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      Point dd(static_cast<std::size_t>(n));
      for (int m = 0; m < n; ++m) {
        double acc = emb[m].d(a, b);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc += c.gamma[m][i][j] * out.tangent[a][i] * out.tangent[b][j];
        dd[m] = acc;
      }
      out.second_form[a][b] = out.second_form[b][a] = -gdot(dd, nu);
    }

  // frame vectors as combinations of E_a: solve E * coeff = e (least squares, exact in exact arithmetic)
  Eigen::MatrixXd emat(n, k);
  for (int a = 0; a < k; ++a)
    for (int m = 0; m < n; ++m) emat(m, a) = out.tangent[a][m];
  const auto qr = emat.colPivHouseholderQr();
  std::vector<Eigen::VectorXd> coeff;
  for (const auto& e : out.frame) {
    Eigen::VectorXd ev(n);
    for (int m = 0; m < n; ++m) ev(m) = e[m];
    coeff.push_back(qr.solve(ev));
  }
  double h = 0.0;
  for (int al = 0; al < k; ++al)
    for (int be = 0; be < k; ++be) {
      double acc = 0.0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) acc += coeff[al](a) * coeff[be](b) * out.second_form[a][b];
      out.second_form_frame[al][be] = acc;
    }
  for (int al = 0; al < k; ++al) h += out.second_form_frame[al][al];
  out.mean_curvature = h;
  return out;
}

double mean_curvature(const MetricField& g, const Hypersurface& s, std::span<const double> p) {
  return surface_geometry(g, s, p).mean_curvature;
}

}  // namespace hemi
