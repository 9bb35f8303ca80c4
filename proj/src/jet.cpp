#include "hemiglue/jet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hemiglue/error.hpp"

namespace hemi {

Jet::Jet(int dim, int order, double value) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxDim) throw Error("jet-dim", "dimension " + std::to_string(dim) + " outside [1,5]");
  if (order < 0 || order > kMaxOrder) throw Error("jet-order", "order " + std::to_string(order) + " outside [0,3]");
  data_[0] = value;
}

Jet Jet::coordinate(int dim, int index, std::span<const double> point, int order) {
  if (index < 0 || index >= dim) {
    throw Error("jet-index", "coordinate index " + std::to_string(index) + " out of range for dim " + std::to_string(dim));
  }
  if (static_cast<int>(point.size()) != dim) throw Error("jet-dim", "point size does not match dim");
  Jet j(dim, order, point[static_cast<std::size_t>(index)]);
  if (order >= 1) j.data_[1 + index] = 1.0;
  return j;
}

int Jet::size() const noexcept {
  int s = 1;
  if (order_ >= 1) s += dim_;
  if (order_ >= 2) s += dim_ * dim_;
  if (order_ >= 3) s += dim_ * dim_ * dim_;
  return s;
}

void Jet::set_d(int i, int j, double v) noexcept {
  data_[hess_off() + i * dim_ + j] = v;
  data_[hess_off() + j * dim_ + i] = v;
}

void Jet::set_d(int i, int j, int k, double v) noexcept {
  const int o = third_off();
  const int n = dim_;
  data_[o + (i * n + j) * n + k] = v;
  data_[o + (i * n + k) * n + j] = v;
  data_[o + (j * n + i) * n + k] = v;
  data_[o + (j * n + k) * n + i] = v;
  data_[o + (k * n + i) * n + j] = v;
  data_[o + (k * n + j) * n + i] = v;
}

Jet Jet::truncated(int order) const {
  Jet r(dim_, std::min(order, order_));
  std::copy_n(data_.begin(), r.size(), r.data_.begin());
  return r;
}

Jet Jet::partial(int i) const {
  if (order_ < 1) throw Error("order-too-low", "partial derivative of an order-0 jet");
  Jet r(dim_, order_ - 1, d(i));
  if (r.order_ >= 1)
    for (int j = 0; j < dim_; ++j) r.data_[1 + j] = d(i, j);
  if (r.order_ >= 2)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) r.data_[r.hess_off() + j * dim_ + k] = d(i, j, k);
  return r;
}

void Jet::check_compatible(const Jet& b) const {
  if (dim_ != b.dim_) {
    throw Error("jet-dim", "mismatched jet dimensions " + std::to_string(dim_) + " and " + std::to_string(b.dim_));
  }
}

Jet Jet::operator-() const {
  Jet r = *this;
  const int s = size();
  for (int i = 0; i < s; ++i) r.data_[i] = -data_[i];
  return r;
}

Jet& Jet::operator+=(const Jet& b) {
  check_compatible(b);
  if (b.order_ < order_) *this = truncated(b.order_);
  const int s = size();
  for (int i = 0; i < s; ++i) data_[i] += b.data_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& b) {
  check_compatible(b);
  if (b.order_ < order_) *this = truncated(b.order_);
  const int s = size();
  for (int i = 0; i < s; ++i) data_[i] -= b.data_[i];
  return *this;
}

Jet& Jet::operator*=(double c) noexcept {
  const int s = size();
  for (int i = 0; i < s; ++i) data_[i] *= c;
  return *this;
}

Jet& Jet::operator*=(const Jet& b) {
  check_compatible(b);
  const Jet& a = *this;
  Jet r(dim_, std::min(order_, b.order_));
  const int n = dim_;
  const double av = a.value(), bv = b.value();
  r.data_[0] = av * bv;
  if (r.order_ >= 1)
    for (int i = 0; i < n; ++i) r.data_[1 + i] = a.d(i) * bv + av * b.d(i);
  if (r.order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        r.set_d(i, j, a.d(i, j) * bv + a.d(i) * b.d(j) + a.d(j) * b.d(i) + av * b.d(i, j));
  if (r.order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          r.set_d(i, j, k,
                  a.d(i, j, k) * bv + a.d(i, j) * b.d(k) + a.d(i, k) * b.d(j) + a.d(j, k) * b.d(i) +
                      a.d(i) * b.d(j, k) + a.d(j) * b.d(i, k) + a.d(k) * b.d(i, j) + av * b.d(i, j, k));
  *this = r;
  return *this;
}

Jet& Jet::operator/=(const Jet& b) {
  check_compatible(b);
  return *this *= reciprocal(b);
}

Jet Jet::compose(double f0, double f1, double f2, double f3) const {
  Jet r(dim_, order_, f0);
  const int n = dim_;
  if (order_ >= 1)
    for (int i = 0; i < n; ++i) r.data_[1 + i] = f1 * d(i);
  if (order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) r.set_d(i, j, f2 * d(i) * d(j) + f1 * d(i, j));
  if (order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k)
          r.set_d(i, j, k,
                  f3 * d(i) * d(j) * d(k) + f2 * (d(i, j) * d(k) + d(i, k) * d(j) + d(j, k) * d(i)) +
                      f1 * d(i, j, k));
  return r;
}

namespace {

std::string describe(const char* fn, double v) {
  std::ostringstream os;
  os.precision(17);
  os << fn << " at value " << v;
  return os.str();
}

}  // namespace

Jet reciprocal(const Jet& a) {
  const double v = a.value();
  if (v == 0.0) throw Error("jet-singular", "division by a jet with zero value");
  const double r = 1.0 / v;
  return a.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
}

Jet operator/(double c, const Jet& a) { return reciprocal(a) *= c; }

Jet square(const Jet& a) { return a * a; }

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return a.compose(e, e, e, e);
}

Jet log(const Jet& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw Error("jet-domain", describe("log", v));
  const double r = 1.0 / v;
  return a.compose(std::log(v), r, -r * r, 2.0 * r * r * r);
}

Jet sqrt(const Jet& a) {
  const double v = a.value();
  if (v < 0.0 || (a.order() >= 1 && v == 0.0)) throw Error("jet-domain", describe("sqrt", v));
  const double s = std::sqrt(v);
  if (a.order() == 0) return Jet(a.dim(), 0, s);
  const double r = 1.0 / v;
  return a.compose(s, 0.5 / s, -0.25 * r / s, 0.375 * r * r / s);
}

Jet pow(const Jet& a, double p) {
  const double v = a.value();
  const bool integral = std::floor(p) == p;
  if (v < 0.0 && !integral) throw Error("jet-domain", describe("pow", v));
  if (v == 0.0 && a.order() >= 1 && !(integral && p >= 0.0)) throw Error("jet-domain", describe("pow", v));
  const double f0 = std::pow(v, p);
  const double f1 = p * std::pow(v, p - 1.0);
  const double f2 = p * (p - 1.0) * std::pow(v, p - 2.0);
  const double f3 = p * (p - 1.0) * (p - 2.0) * std::pow(v, p - 3.0);
  return a.compose(f0, f1, f2, f3);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(s, c, -s, -c);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return a.compose(c, -s, -c, s);
}

Jet asin(const Jet& a) {
  const double v = a.value();
  if (std::abs(v) > 1.0 || (a.order() >= 1 && std::abs(v) == 1.0)) throw Error("jet-domain", describe("arcsin", v));
  const double w = 1.0 - v * v;
  const double s = std::sqrt(w);
  // d/dv (1-v^2)^{-1/2} = v (1-v^2)^{-3/2}; next: (1+2v^2)(1-v^2)^{-5/2}
  return a.compose(std::asin(v), 1.0 / s, v / (w * s), (1.0 + 2.0 * v * v) / (w * w * s));
}

Jet jet_compose(UnaryFn fn, const Jet& a, double r) {
  switch (fn) {
    case UnaryFn::Exp: return exp(a);
    case UnaryFn::Log: return log(a);
    case UnaryFn::Sqrt: return sqrt(a);
    case UnaryFn::Pow: return pow(a, r);
    case UnaryFn::Sin: return sin(a);
    case UnaryFn::Cos: return cos(a);
    case UnaryFn::Arcsin: return asin(a);
  }
  throw Error("jet-domain", "unknown function");
}

JetVec coordinate_jets(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  JetVec out;
  out.reserve(point.size());
  for (int i = 0; i < n; ++i) out.push_back(Jet::coordinate(n, i, point, order));
  return out;
}

std::vector<double> values(const JetVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.value());
  return out;
}

}  // namespace hemi
