#pragma once

// Numeric chart tensor calculus at a single point.
//
// Everything here consumes exact derivative data (extracted from jets) and
// never differentiates numerically. Index conventions:
//   Gamma^m_{jk}            -> gamma[m][j][k]
//   d_i Gamma^m_{jk}        -> dgamma[i][m][j][k]
//   R_{ijk}^m               -> riemann[m][i][j][k], with
//       R_{ijk}^m = d_i G^m_jk - d_j G^m_ik + G^l_jk G^m_il - G^l_ik G^m_jl
//   Ric_{jk} = R_{ijk}^i,  R = g^{jk} Ric_{jk}.

#include <array>
#include <vector>

#include "hemiglue/jet.hpp"

namespace hemi {

/// Symmetric n x n matrix of jets (entries (i,j) and (j,i) always equal).
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int n, int dim, int order);

  int size() const noexcept { return n_; }
  const Jet& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i * n_ + j)]; }
  void set(int i, int j, const Jet& v);
  int order() const;

  JetMatrix& operator+=(const JetMatrix& o);
  JetMatrix& operator-=(const JetMatrix& o);
  JetMatrix& operator*=(double c);
  JetMatrix& operator*=(const Jet& c);

 private:
  int n_ = 0;
  std::vector<Jet> e_;
};

inline JetMatrix operator+(JetMatrix a, const JetMatrix& b) { return a += b; }
inline JetMatrix operator-(JetMatrix a, const JetMatrix& b) { return a -= b; }
inline JetMatrix operator*(JetMatrix a, double c) { return a *= c; }
inline JetMatrix operator*(double c, JetMatrix a) { return a *= c; }
inline JetMatrix operator*(const Jet& c, JetMatrix a) { return a *= c; }

using Mat = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// A symmetric 2-tensor with its first and second partial derivatives.
struct TensorJet {
  int n = 0;
  int order = 0;
  double v[kMaxDim][kMaxDim]{};                      // v[i][j]
  double d1[kMaxDim][kMaxDim][kMaxDim]{};            // d1[k][i][j] = d_k v_ij
  double d2[kMaxDim][kMaxDim][kMaxDim][kMaxDim]{};   // d2[k][l][i][j] = d_k d_l v_ij

  static TensorJet from(const JetMatrix& m);
  TensorJet& operator+=(const TensorJet& o);
  TensorJet& axpy(double a, const TensorJet& o);
  Mat value() const;
};

/// Levi-Civita data of a metric.
struct Connection {
  int n = 0;
  double g[kMaxDim][kMaxDim]{};
  double ginv[kMaxDim][kMaxDim]{};
  double gamma[kMaxDim][kMaxDim][kMaxDim]{};
  double dgamma[kMaxDim][kMaxDim][kMaxDim][kMaxDim]{};
  bool has_dgamma = false;
};

struct CurvatureData {
  Connection conn;
  double riemann[kMaxDim][kMaxDim][kMaxDim][kMaxDim]{};
  double ricci[kMaxDim][kMaxDim]{};
  double scalar = 0.0;
};

/// Inverse of an SPD matrix. Throws "metric-singular" if Cholesky fails.
Mat spd_inverse(const Mat& a, int n);
/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& a, int n);

/// Christoffel symbols (and their first derivatives when m.order >= 2).
Connection levi_civita(const TensorJet& metric);
CurvatureData curvature(const TensorJet& metric);

/// First covariant derivative Dh[j][k][l] = (D_j h)_{kl}.
struct CovariantDerivs {
  int n = 0;
  double dh[kMaxDim][kMaxDim][kMaxDim]{};
  double ddh[kMaxDim][kMaxDim][kMaxDim][kMaxDim]{};  // ddh[i][j][k][l] = (D_i D_j h)_{kl}
};
CovariantDerivs covariant_derivatives(const Connection& conn, const TensorJet& h);

/// Hessian D^2u = d^2u - Gamma du and Laplacian of a scalar jet.
struct HessianLaplacian {
  Mat hessian{};
  double laplacian = 0.0;
};
HessianLaplacian hessian_laplacian(const Connection& conn, const Jet& u);

/// First variation of scalar curvature: div div h - Lap tr h - <Ric, h>.
double linearized_scalar(const CurvatureData& g, const TensorJet& h);

/// Exact scalar curvature of g + h via the difference-tensor expansion;
/// g+h must be positive definite ("perturbation-too-large" otherwise).
double perturbed_scalar(const CurvatureData& g, const TensorJet& h);

}  // namespace hemi
