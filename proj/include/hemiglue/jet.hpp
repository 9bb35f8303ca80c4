#pragma once

// Truncated multivariate Taylor arithmetic ("jets") up to order 3.
//
// A Jet stores the value of a scalar function together with its gradient,
// Hessian and third-derivative tensor at a fixed chart point. The derivative
// blocks are stored densely and are kept exactly symmetric: every kernel
// computes one representative per sorted index tuple and copies it to all
// permutations.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hemi {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxOrder = 3;

class Jet {
 public:
  Jet() = default;
  Jet(int dim, int order, double value = 0.0);

  static Jet constant(int dim, int order, double value) { return Jet(dim, order, value); }
  /// Jet of the coordinate function y_index at `point`.
  static Jet coordinate(int dim, int index, std::span<const double> point, int order);

  int dim() const noexcept { return dim_; }
  int order() const noexcept { return order_; }

  double value() const noexcept { return data_[0]; }
  double d(int i) const noexcept { return data_[1 + i]; }
  double d(int i, int j) const noexcept { return data_[hess_off() + i * dim_ + j]; }
  double d(int i, int j, int k) const noexcept {
    return data_[third_off() + (i * dim_ + j) * dim_ + k];
  }

  void set_value(double v) noexcept { data_[0] = v; }
  void set_d(int i, double v) noexcept { data_[1 + i] = v; }
  /// Writes both (i,j) and (j,i).
  void set_d(int i, int j, double v) noexcept;
  /// Writes every permutation of (i,j,k).
  void set_d(int i, int j, int k, double v) noexcept;

  /// Drops derivative blocks above `order`.
  Jet truncated(int order) const;
  /// The jet of the partial derivative along coordinate i; order drops by one.
  Jet partial(int i) const;

  /// Univariate chain rule: given F(v), F'(v), F''(v), F'''(v) at v = value(),
  /// returns the jet of F(this).
  Jet compose(double f0, double f1, double f2, double f3) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& b);
  Jet& operator-=(const Jet& b);
  Jet& operator*=(const Jet& b);
  Jet& operator/=(const Jet& b);
  Jet& operator+=(double c) noexcept {
    data_[0] += c;
    return *this;
  }
  Jet& operator-=(double c) noexcept {
    data_[0] -= c;
    return *this;
  }
  Jet& operator*=(double c) noexcept;
  Jet& operator/=(double c) noexcept { return *this *= (1.0 / c); }

  /// Number of stored coefficients for the current dim/order.
  int size() const noexcept;
  std::span<const double> coefficients() const noexcept { return {data_.data(), static_cast<std::size_t>(size())}; }

 private:
  int hess_off() const noexcept { return 1 + dim_; }
  int third_off() const noexcept { return 1 + dim_ + dim_ * dim_; }
  void check_compatible(const Jet& b) const;

  int dim_ = 0;
  int order_ = 0;
  std::array<double, 1 + kMaxDim + kMaxDim * kMaxDim + kMaxDim * kMaxDim * kMaxDim> data_{};
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double c) { return a += c; }
inline Jet operator+(double c, Jet a) { return a += c; }
inline Jet operator-(Jet a, double c) { return a -= c; }
inline Jet operator-(double c, const Jet& a) { return (-a) += c; }
inline Jet operator*(Jet a, double c) { return a *= c; }
inline Jet operator*(double c, Jet a) { return a *= c; }
inline Jet operator/(Jet a, double c) { return a /= c; }
Jet operator/(double c, const Jet& a);

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double r);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet asin(const Jet& a);
Jet reciprocal(const Jet& a);
Jet square(const Jet& a);

enum class UnaryFn { Exp, Log, Sqrt, Pow, Sin, Cos, Arcsin };
/// Dispatching form used by tests and the CLI; `r` is only read for Pow.
Jet jet_compose(UnaryFn fn, const Jet& a, double r = 0.0);

using JetVec = std::vector<Jet>;

/// Coordinate jets of every chart variable at `point`.
JetVec coordinate_jets(std::span<const double> point, int order);
/// Values of a jet vector.
std::vector<double> values(const JetVec& v);

}  // namespace hemi
