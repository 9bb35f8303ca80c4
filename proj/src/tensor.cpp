#include "hemiglue/tensor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "hemiglue/error.hpp"

namespace hemi {

JetMatrix::JetMatrix(int n, int dim, int order) : n_(n), e_(static_cast<std::size_t>(n * n), Jet(dim, order)) {}

void JetMatrix::set(int i, int j, const Jet& v) {
  e_[static_cast<std::size_t>(i * n_ + j)] = v;
  e_[static_cast<std::size_t>(j * n_ + i)] = v;
}

int JetMatrix::order() const {
  int o = kMaxOrder;
  for (const auto& j : e_) o = std::min(o, j.order());
  return o;
}

JetMatrix& JetMatrix::operator+=(const JetMatrix& o) {
  for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
  return *this;
}

JetMatrix& JetMatrix::operator-=(const JetMatrix& o) {
  for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
  return *this;
}

JetMatrix& JetMatrix::operator*=(double c) {
  for (auto& j : e_) j *= c;
  return *this;
}

JetMatrix& JetMatrix::operator*=(const Jet& c) {
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) set(i, j, (*this)(i, j) * c);
  return *this;
}

TensorJet TensorJet::from(const JetMatrix& m) {
  TensorJet t;
  t.n = m.size();
  t.order = std::min(m.order(), 2);
  const int n = t.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Jet& e = m(i, j);
      t.v[i][j] = e.value();
      if (t.order >= 1)
        for (int k = 0; k < n; ++k) t.d1[k][i][j] = e.d(k);
      if (t.order >= 2)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) t.d2[k][l][i][j] = e.d(k, l);
    }
  return t;
}

TensorJet& TensorJet::operator+=(const TensorJet& o) { return axpy(1.0, o); }

TensorJet& TensorJet::axpy(double a, const TensorJet& o) {
  order = std::min(order, o.order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      v[i][j] += a * o.v[i][j];
      for (int k = 0; k < n; ++k) {
        d1[k][i][j] += a * o.d1[k][i][j];
        for (int l = 0; l < n; ++l) d2[k][l][i][j] += a * o.d2[k][l][i][j];
      }
    }
  return *this;
}

Mat TensorJet::value() const {
  Mat m{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = v[i][j];
  return m;
}

Mat spd_inverse(const Mat& a, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i][j];
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw Error("metric-singular", "metric matrix is not positive definite");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Mat out{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out[i][j] = out[j][i] = 0.5 * (inv(i, j) + inv(j, i));
  return out;
}

double min_eigenvalue(const Mat& a, int n) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Connection levi_civita(const TensorJet& metric) {
  if (metric.order < 1) throw Error("order-too-low", "Christoffel symbols need first derivatives of the metric");
  Connection c;
  const int n = metric.n;
  c.n = n;
  const Mat ginv = spd_inverse(metric.value(), n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      c.g[i][j] = metric.v[i][j];
      c.ginv[i][j] = ginv[i][j];
    }
  // first-kind symbols S_{ljk} = d_j g_kl + d_k g_jl - d_l g_jk
  double s[kMaxDim][kMaxDim][kMaxDim]{};
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        s[l][j][k] = metric.d1[j][k][l] + metric.d1[k][j][l] - metric.d1[l][j][k];
        s[l][k][j] = s[l][j][k];
      }
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += c.ginv[m][l] * s[l][j][k];
        c.gamma[m][j][k] = c.gamma[m][k][j] = 0.5 * acc;
      }
  if (metric.order < 2) return c;

  c.has_dgamma = true;
  for (int i = 0; i < n; ++i) {
    // d_i g^{ml} = -g^{ma} d_i g_ab g^{bl}
    double dginv[kMaxDim][kMaxDim]{};
    double tmp[kMaxDim][kMaxDim]{};
    for (int a = 0; a < n; ++a)
      for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b) acc += metric.d1[i][a][b] * c.ginv[b][l];
        tmp[a][l] = acc;
      }
    for (int m = 0; m < n; ++m)
      for (int l = m; l < n; ++l) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a) acc += c.ginv[m][a] * tmp[a][l];
        dginv[m][l] = dginv[l][m] = -acc;
      }
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) {
            const double ds = metric.d2[i][j][k][l] + metric.d2[i][k][j][l] - metric.d2[i][l][j][k];
            acc += dginv[m][l] * s[l][j][k] + c.ginv[m][l] * ds;
          }
          c.dgamma[i][m][j][k] = c.dgamma[i][m][k][j] = 0.5 * acc;
        }
  }
  return c;
}

CurvatureData curvature(const TensorJet& metric) {
  if (metric.order < 2) throw Error("order-too-low", "curvature needs second derivatives of the metric");
  CurvatureData cd;
  cd.conn = levi_civita(metric);
  const Connection& c = cd.conn;
  const int n = c.n;
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double r = c.dgamma[i][m][j][k] - c.dgamma[j][m][i][k];
          for (int l = 0; l < n; ++l) r += c.gamma[l][j][k] * c.gamma[m][i][l] - c.gamma[l][i][k] * c.gamma[m][j][l];
          cd.riemann[m][i][j][k] = r;
        }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += cd.riemann[i][i][j][k];
      cd.ricci[j][k] = acc;
    }
  // symmetrize: Ric is symmetric for Levi-Civita, this removes rounding skew
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) cd.ricci[j][k] = cd.ricci[k][j] = 0.5 * (cd.ricci[j][k] + cd.ricci[k][j]);
  double r = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) r += c.ginv[j][k] * cd.ricci[j][k];
  cd.scalar = r;
  return cd;
}

CovariantDerivs covariant_derivatives(const Connection& c, const TensorJet& h) {
  if (h.order < 2 || !c.has_dgamma) throw Error("order-too-low", "second covariant derivatives need order-2 data");
  CovariantDerivs out;
  const int n = c.n;
  out.n = n;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double acc = h.d1[j][k][l];
        for (int p = 0; p < n; ++p) acc -= c.gamma[p][j][k] * h.v[p][l] + c.gamma[p][j][l] * h.v[k][p];
        out.dh[j][k][l] = acc;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          // d_i of (D_j h)_{kl}
          double acc = h.d2[i][j][k][l];
          for (int p = 0; p < n; ++p) {
            acc -= c.dgamma[i][p][j][k] * h.v[p][l] + c.gamma[p][j][k] * h.d1[i][p][l];
            acc -= c.dgamma[i][p][j][l] * h.v[k][p] + c.gamma[p][j][l] * h.d1[i][k][p];
          }
          for (int p = 0; p < n; ++p) {
            acc -= c.gamma[p][i][j] * out.dh[p][k][l] + c.gamma[p][i][k] * out.dh[j][p][l] +
                   c.gamma[p][i][l] * out.dh[j][k][p];
          }
          out.ddh[i][j][k][l] = acc;
        }
  return out;
}

HessianLaplacian hessian_laplacian(const Connection& c, const Jet& u) {
  if (u.order() < 2) throw Error("order-too-low", "Hessian needs an order-2 jet");
  HessianLaplacian out;
  const int n = c.n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double acc = u.d(i, j);
      for (int k = 0; k < n; ++k) acc -= c.gamma[k][i][j] * u.d(k);
      out.hessian[i][j] = out.hessian[j][i] = acc;
    }
  double lap = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lap += c.ginv[i][j] * out.hessian[i][j];
  out.laplacian = lap;
  return out;
}

double linearized_scalar(const CurvatureData& g, const TensorJet& h) {
  const Connection& c = g.conn;
  const CovariantDerivs cd = covariant_derivatives(c, h);
  const int n = c.n;
  double divdiv = 0.0, laptr = 0.0, ric_h = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          divdiv += c.ginv[i][a] * c.ginv[j][b] * cd.ddh[a][b][i][j];
          laptr += c.ginv[a][b] * c.ginv[i][j] * cd.ddh[a][b][i][j];
          ric_h += c.ginv[i][a] * c.ginv[j][b] * g.ricci[a][b] * h.v[i][j];
        }
  return divdiv - laptr - ric_h;
}

double perturbed_scalar(const CurvatureData& g, const TensorJet& h) {
  const Connection& c = g.conn;
  const int n = c.n;
  Mat gh{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gh[i][j] = c.g[i][j] + h.v[i][j];
  if (min_eigenvalue(gh, n) <= 0.0) throw Error("perturbation-too-large", "g + h is not positive definite");
  const Mat gi = spd_inverse(gh, n);
  const CovariantDerivs cd = covariant_derivatives(c, h);

  // difference tensor Gamma^m_jk = 1/2 ghat^{lm} (D_j h_kl + D_k h_jl - D_l h_jk)
  double gam[kMaxDim][kMaxDim][kMaxDim]{};
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) acc += gi[l][m] * (cd.dh[j][k][l] + cd.dh[k][j][l] - cd.dh[l][j][k]);
        gam[m][j][k] = gam[m][k][j] = 0.5 * acc;
      }
  double low[kMaxDim][kMaxDim][kMaxDim]{};  // ghat_pq Gamma^q_il
  for (int p = 0; p < n; ++p)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        double acc = 0.0;
        for (int q = 0; q < n; ++q) acc += gh[p][q] * gam[q][i][l];
        low[p][i][l] = acc;
      }

  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) r += gi[i][k] * g.ricci[i][k];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (gi[i][k] == 0.0) continue;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
          const double w = gi[i][k] * gi[j][l];
          double quad = 0.0;
          for (int p = 0; p < n; ++p) quad += low[p][i][l] * gam[p][j][k] - low[p][j][l] * gam[p][i][k];
          r += w * quad;
          r -= w * (cd.ddh[i][k][j][l] - cd.ddh[i][l][j][k]);
        }
    }
  return r;
}

}  // namespace hemi
