#include "hemiglue/harmonic.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "hemiglue/error.hpp"
#include "hemiglue/sphere.hpp"

namespace hemi {

namespace {

// Value with the two ambient partials d/dx_n, d/dx_{n+1}.
struct Dual {
  double v = 0.0, dn = 0.0, df = 0.0;
};
Dual operator+(Dual a, const Dual& b) { return {a.v + b.v, a.dn + b.dn, a.df + b.df}; }
Dual operator-(Dual a, const Dual& b) { return {a.v - b.v, a.dn - b.dn, a.df - b.df}; }
Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.dn * b.v + a.v * b.dn, a.df * b.v + a.v * b.df}; }
Dual operator*(double c, const Dual& a) { return {c * a.v, c * a.dn, c * a.df}; }

// Generators evaluated in any ring T (Dual for assembly, Jet for fields).
template <class T>
std::vector<T> generators_at(const HarmonicBasis& b, const T& xn, const T& xf, const T& one) {
  const double nu = 0.5 * (b.n - 2);
  const int L = b.max_degree;
  const T s2 = one - xf * xf;
  // g[m] = s^m C^{nu}_m(x_n/s), a polynomial in x_n and s^2.
  std::vector<T> g;
  g.reserve(static_cast<std::size_t>(L + 1));
  g.push_back(one);
  if (L >= 1) g.push_back((2.0 * nu) * xn);
  for (int k = 2; k <= L; ++k)
    g.push_back((2.0 * (k + nu - 1.0) / k) * (xn * g[k - 1]) - ((k + 2.0 * nu - 2.0) / k) * (s2 * g[k - 2]));
  // c[m][j] = C^{m + (n-1)/2}_j(x_{n+1}).
  std::vector<std::vector<T>> c(static_cast<std::size_t>(L + 1));
  for (int m = 0; m <= L; ++m) {
    const double lam = m + 0.5 * (b.n - 1);
    auto& row = c[static_cast<std::size_t>(m)];
    row.push_back(one);
    if (L - m >= 1) row.push_back((2.0 * lam) * xf);
    for (int k = 2; k <= L - m; ++k)
      row.push_back((2.0 * (k + lam - 1.0) / k) * (xf * row[k - 1]) - ((k + 2.0 * lam - 2.0) / k) * row[k - 2]);
  }
  std::vector<T> out;
  out.reserve(b.generators.size());
  if (b.space == TrialSpace::OddHarmonic) {
    for (const auto& gen : b.generators)
      out.push_back(gen.scale * (g[gen.order] * c[gen.order][gen.degree - gen.order]));
    return out;
  }
  std::vector<std::vector<T>> p(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) {
    const auto& a = b.rec_a[static_cast<std::size_t>(m)];
    const auto& bb = b.rec_b[static_cast<std::size_t>(m)];
    auto& row = p[static_cast<std::size_t>(m)];
    row.push_back(b.rec_p0[static_cast<std::size_t>(m)] * one);
    for (int k = 0; k + 1 < L - m; ++k) {
      T next = (1.0 / bb[k + 1]) * ((xf - a[k] * one) * row[k]);
      if (k > 0) next = next - (bb[k] / bb[k + 1]) * row[k - 1];
      row.push_back(next);
    }
  }
  for (const auto& gen : b.generators) out.push_back(gen.scale * (g[gen.order] * (xf * p[gen.order][gen.index])));
  return out;
}

// Orthonormal polynomials in x on [0,1] for the weight x^2 (1-x^2)^alpha,
// from a Gauss-Jacobi discretization (exact for the needed degrees).
void stieltjes(int count, double alpha, double& p0, std::vector<double>& a, std::vector<double>& b) {
  const GaussRule gj = alpha == 0.0 ? gauss_legendre(count + 40) : gauss_jacobi(count + 40, alpha, 0.0);
  const std::size_t N = gj.x.size();
  std::vector<double> x(N), w(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = 0.5 * (1.0 + gj.x[i]);
    w[i] = gj.w[i] * x[i] * x[i] * std::pow(1.0 + x[i], alpha);
  }
  double total = 0.0;
  for (double v : w) total += v;
  p0 = 1.0 / std::sqrt(total);
  std::vector<double> prev(N, 0.0), cur(N, p0);
  a.assign(static_cast<std::size_t>(count), 0.0);
  b.assign(static_cast<std::size_t>(count + 1), 0.0);
  for (int k = 0; k < count; ++k) {
    double ak = 0.0;
    for (std::size_t i = 0; i < N; ++i) ak += w[i] * x[i] * cur[i] * cur[i];
    a[k] = ak;
    std::vector<double> next(N);
    for (std::size_t i = 0; i < N; ++i) next[i] = (x[i] - ak) * cur[i] - b[k] * prev[i];
    // Reorthogonalize against the two previous polynomials.
    double c0 = 0.0, c1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      c0 += w[i] * next[i] * cur[i];
      c1 += w[i] * next[i] * prev[i];
    }
    double nn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      next[i] -= c0 * cur[i] + c1 * prev[i];
      nn += w[i] * next[i] * next[i];
    }
    b[k + 1] = std::sqrt(nn);
    for (std::size_t i = 0; i < N; ++i) next[i] /= b[k + 1];
    prev = std::move(cur);
    cur = std::move(next);
  }
}

std::vector<Dual> eval_generators(const HarmonicBasis& b, double xn, double xf) {
  return generators_at(b, Dual{xn, 1.0, 0.0}, Dual{xf, 0.0, 1.0}, Dual{1.0, 0.0, 0.0});
}

}  // namespace

int harmonic_multiplicity(int l) { return l < 1 ? 0 : (l + 1) / 2; }

std::vector<double> HarmonicBasis::generator_values(double xn, double xf) const {
  const auto g = eval_generators(*this, xn, xf);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = g[i].v;
  return v;
}

std::vector<double> HarmonicBasis::generator_coeffs(std::span<const double> element_coeffs) const {
  if (element_coeffs.size() != elements.size()) throw Error("basis-size", "coefficient count does not match the basis");
  std::vector<double> d(generators.size(), 0.0);
  for (std::size_t e = 0; e < elements.size(); ++e)
    for (std::size_t g = 0; g < generators.size(); ++g) d[g] += element_coeffs[e] * elements[e].coeffs[g];
  return d;
}

double HarmonicBasis::evaluate(std::span<const double> element_coeffs, double xn, double xf) const {
  const auto d = generator_coeffs(element_coeffs);
  const auto v = generator_values(xn, xf);
  double s = 0.0;
  for (std::size_t g = 0; g < d.size(); ++g) s += d[g] * v[g];
  return s;
}

double HarmonicBasis::evaluate_element(std::size_t k, double xn, double xf) const {
  const auto v = generator_values(xn, xf);
  double s = 0.0;
  for (std::size_t g = 0; g < v.size(); ++g) s += elements[k].coeffs[g] * v[g];
  return s;
}

std::vector<double> HarmonicBasis::shifted_laplacian(double xn, double xf, double shift) const {
  const double at[2] = {xn, xf};
  const Jet a = Jet::coordinate(2, 0, at, 2), b = Jet::coordinate(2, 1, at, 2);
  const auto gens = generators_at(*this, a, b, Jet(2, 2, 1.0));
  // Sphere Laplacian of F(x_n, x_{n+1}): (delta - x x^T) : D^2 F - n x . DF.
  std::vector<double> lg(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const Jet& v = gens[g];
    double lap = -n * (xn * v.d(0) + xf * v.d(1));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) lap += ((i == j ? 1.0 : 0.0) - at[i] * at[j]) * v.d(i, j);
    lg[g] = lap + shift * v.value();
  }
  std::vector<double> out(elements.size(), 0.0);
  for (std::size_t k = 0; k < elements.size(); ++k)
    for (std::size_t g = 0; g < lg.size(); ++g) out[k] += elements[k].coeffs[g] * lg[g];
  return out;
}

Jet HarmonicBasis::evaluate(std::span<const double> element_coeffs, const JetVec& y) const {
  const auto d = generator_coeffs(element_coeffs);
  const JetVec x = ambient_coordinates(y);
  const Jet one(y.front().dim(), y.front().order(), 1.0);
  const auto gens = generators_at(*this, x[static_cast<std::size_t>(n - 1)], x[static_cast<std::size_t>(n)], one);
  Jet s(y.front().dim(), y.front().order());
  for (std::size_t g = 0; g < gens.size(); ++g)
    if (d[g] != 0.0) s += d[g] * gens[g];
  return s;
}

ScalarField HarmonicBasis::field(std::vector<double> element_coeffs) const {
  return [basis = *this, c = std::move(element_coeffs)](const JetVec& y) { return basis.evaluate(c, y); };
}

ScalarField HarmonicBasis::element_field(std::size_t k) const {
  std::vector<double> c(elements.size(), 0.0);
  c.at(k) = 1.0;
  return field(std::move(c));
}

QuadratureRule harmonic_rule(int n, int max_degree) { return hemisphere_rule(n, 2 * max_degree + 40, max_degree + 8, true); }

HarmonicBasis build_harmonic_basis(int n, int max_degree, TrialSpace space) {
  return build_harmonic_basis(n, max_degree, space, harmonic_rule(n, max_degree));
}

HarmonicBasis build_harmonic_basis(int n, int max_degree, TrialSpace space, const QuadratureRule& rule) {
  if (n < 3 || n > kMaxDim) throw Error("unsupported-dimension", "harmonic basis needs 3 <= n <= 5");
  if (max_degree < 1 || max_degree > 24) throw Error("unsupported-degree", "harmonic basis degree must be in [1, 24]");
  if (!rule.symmetric || rule.target != QuadTarget::Hemisphere)
    throw Error("unsupported-degree", "harmonic basis needs a symmetric hemisphere rule");

  HarmonicBasis basis;
  basis.n = n;
  basis.max_degree = max_degree;
  basis.space = space;
  if (space == TrialSpace::OddHarmonic) {
    for (int l = 1; l <= max_degree; ++l)
      for (int m = 0; m <= l; ++m)
        if ((l - m) % 2 == 1) basis.generators.push_back({l, m, 0, 1.0});
  } else {
    for (int m = 0; m < max_degree; ++m) {
      double p0 = 0.0;
      std::vector<double> a, b;
      stieltjes(max_degree - m, m + 0.5 * (n - 2), p0, a, b);
      basis.rec_p0.push_back(p0);
      basis.rec_a.push_back(std::move(a));
      basis.rec_b.push_back(std::move(b));
    }
    for (int deg = 1; deg <= max_degree; ++deg)
      for (int m = 0; m < deg; ++m) basis.generators.push_back({deg, m, deg - 1 - m, 1.0});
  }
  const int m = static_cast<int>(basis.generators.size());

  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(m, m);
  const auto per_node = index_map(rule.size(), [&](std::size_t q) {
    const Point x = to_ambient(rule.nodes[q]);
    const double xn = x[static_cast<std::size_t>(n - 1)];
    const double xf = x[static_cast<std::size_t>(n)];
    return std::make_tuple(xn, xf, eval_generators(basis, xn, xf));
  });
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto& [xn, xf, g] = per_node[q];
    const double w = rule.weights[q];
    // <grad x_a, grad x_b> = delta_ab - x_a x_b on the unit sphere.
    const double gnn = 1.0 - xn * xn, gff = 1.0 - xf * xf, gnf = -xn * xf;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        mass(i, j) += w * g[i].v * g[j].v;
        stiff(i, j) += w * (gnn * g[i].dn * g[j].dn + gff * g[i].df * g[j].df + gnf * (g[i].dn * g[j].df + g[i].df * g[j].dn));
      }
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < i; ++j) {
      mass(i, j) = mass(j, i);
      stiff(i, j) = stiff(j, i);
    }
  // Fold the normalization into the generators so stored coefficients refer to unit-norm functions.
  for (int i = 0; i < m; ++i) basis.generators[static_cast<std::size_t>(i)].scale = 1.0 / std::sqrt(mass(i, i));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double sc = basis.generators[static_cast<std::size_t>(i)].scale * basis.generators[static_cast<std::size_t>(j)].scale;
      mass(i, j) *= sc;
      stiff(i, j) *= sc;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(mass, Eigen::EigenvaluesOnly);
  const double lo = gram.eigenvalues().minCoeff(), hi = gram.eigenvalues().maxCoeff();
  basis.gram_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(basis.gram_condition <= 1e12))
    throw Error("basis-ill-conditioned", "Gram condition " + std::to_string(basis.gram_condition) + " exceeds 1e12; reduce L (min eigenvalue " + std::to_string(lo) + ")");

  // Modified Gram-Schmidt in the mass inner product, two passes per column.
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j < m; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) {
        const double proj = v.col(i).dot(mass * v.col(j));
        v.col(j) -= proj * v.col(i);
      }
    v.col(j) /= std::sqrt(v.col(j).dot(mass * v.col(j)));
  }
  const Eigen::MatrixXd reduced = v.transpose() * stiff * v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (reduced + reduced.transpose()));
  const Eigen::MatrixXd coeffs = v * es.eigenvectors();

  const auto reference = eval_generators(basis, 0.3, 0.6);
  basis.eigenvalue_error = 0.0;
  for (int k = 0; k < m; ++k) {
    HarmonicElement e;
    e.eigenvalue = es.eigenvalues()(k);
    // Root of l(l+n-1) = eigenvalue.
    const double lf = 0.5 * (-(n - 1.0) + std::sqrt((n - 1.0) * (n - 1.0) + 4.0 * std::max(0.0, e.eigenvalue)));
    const int l = static_cast<int>(std::lround(lf));
    const double exact = l * (l + n - 1.0);
    const double rel = exact > 0.0 ? std::abs(e.eigenvalue - exact) / exact : 1.0;
    if (rel < 1e-6 && l <= max_degree) {
      e.degree = l;
      basis.eigenvalue_error = std::max(basis.eigenvalue_error, rel);
    }
    // Sign convention: positive at a fixed interior reference point.
    double s = 0.0;
    for (int g = 0; g < m; ++g) s += coeffs(g, k) * reference[static_cast<std::size_t>(g)].v;
    const double sign = s < 0.0 ? -1.0 : 1.0;
    e.coeffs.resize(static_cast<std::size_t>(m));
    for (int g = 0; g < m; ++g) e.coeffs[static_cast<std::size_t>(g)] = sign * coeffs(g, k);
    basis.elements.push_back(std::move(e));
  }
  if (space == TrialSpace::OddHarmonic) {
    for (const auto& e : basis.elements)
      if (e.degree < 0)
        throw Error("basis-eigenvalue-mismatch", "eigenvalue " + std::to_string(e.eigenvalue) + " is not of the form l(l+n-1)");
  }
  return basis;
}

double harmonic_residual(const HarmonicBasis& basis, std::size_t k, const std::vector<Point>& points) {
  const auto& e = basis.elements.at(k);
  const ScalarField y = basis.element_field(k);
  const MetricField g = round_metric(basis.n);
  double worst = 0.0;
  for (const auto& p : points) {
    const auto hl = hessian_laplacian(y, g, p);
    const double val = basis.evaluate_element(k, to_ambient(p)[static_cast<std::size_t>(basis.n - 1)],
                                              to_ambient(p)[static_cast<std::size_t>(basis.n)]);
    worst = std::max(worst, std::abs(hl.laplacian + e.eigenvalue * val));
  }
  return worst;
}

}  // namespace hemi
