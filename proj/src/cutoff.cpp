#include "hemiglue/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hemiglue/error.hpp"
#include "hemiglue/quadrature.hpp"

namespace hemi {

namespace {

// exp(1 - 1/(1 - q^2)) on |q| < 1 with its q-derivative.
double flat_bump(double q) { return std::abs(q) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - q * q)); }
double flat_bump_d1(double q) {
  if (std::abs(q) >= 1.0) return 0.0;
  const double w = 1.0 - q * q;
  return flat_bump(q) * (-2.0 * q / (w * w));
}

constexpr double kBumpCenter = 0.75, kBumpHalfWidth = 0.15;

double shoulder(double s) { return s <= 0.5 ? 1.0 : (s >= 1.0 ? 0.0 : flat_bump(2.0 * s - 1.0)); }
double shoulder_d1(double s) { return (s <= 0.5 || s >= 1.0) ? 0.0 : 2.0 * flat_bump_d1(2.0 * s - 1.0); }
double interior_bump(double s) { return flat_bump((s - kBumpCenter) / kBumpHalfWidth); }
double interior_bump_d1(double s) { return flat_bump_d1((s - kBumpCenter) / kBumpHalfWidth) / kBumpHalfWidth; }

template <class Fn>
double composite(Fn&& fn, double a, double b, int panels, const GaussRule& rule) {
  double sum = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t k = 0; k < rule.x.size(); ++k) sum += 0.5 * h * rule.w[k] * fn(lo + 0.5 * h * (rule.x[k] + 1.0));
  }
  return sum;
}

}  // namespace

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

Jet smoothstep(const Jet& x) {
  const double v = x.value();
  // exp(-1/x) is below the double range of 1 within 1e-3 of either end.
  if (v <= 1e-3) return Jet(x.dim(), x.order(), 0.0);
  if (v >= 1.0 - 1e-3) return Jet(x.dim(), x.order(), 1.0);
  const Jet a = exp(-1.0 / x);
  const Jet b = exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

CutoffChi::CutoffChi(int nodes) {
  if (nodes < 16) throw Error("cutoff-table", "chi table needs at least 16 nodes");
  const GaussRule fine = gauss_legendre(16);
  const double shoulder_mass = composite(shoulder, 0.5, 1.0, 256, fine);
  const double bump_mass = composite(interior_bump, kBumpCenter - kBumpHalfWidth, kBumpCenter + kBumpHalfWidth, 256, fine);
  alpha_ = (0.5 - shoulder_mass) / bump_mass;
  if (alpha_ < 0.0) throw Error("cutoff-construction", "negative bump weight");

  nodes_.resize(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) nodes_[i] = 0.75 - 0.25 * std::cos(std::numbers::pi * i / (nodes - 1));
  nodes_.front() = 0.5;
  nodes_.back() = 1.0;
  c0_.assign(nodes_.size(), 0.0);
  c1_.assign(nodes_.size(), 0.0);
  c2_.assign(nodes_.size(), 0.0);
  c3_.assign(nodes_.size(), 0.0);
  c0_[0] = 0.375;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    c2_[i] = -bump(nodes_[i]);
    c3_[i] = -bump_d1(nodes_[i]);
  }
  // chi' accumulates from the right end, where it vanishes, so it stays a sum
  // of nonnegative terms; chi accumulates from the left.
  std::vector<double> i2(nodes_.size(), 0.0);
  c1_.back() = 0.0;
  for (std::size_t i = nodes_.size() - 1; i-- > 0;) {
    const double a = nodes_[i], b = nodes_[i + 1], h = b - a;
    double i1 = 0.0;
    for (std::size_t k = 0; k < fine.x.size(); ++k) {
      const double x = a + 0.5 * h * (fine.x[k] + 1.0);
      const double w = 0.5 * h * fine.w[k] * bump(x);
      i1 += w;
      i2[i] += (b - x) * w;
    }
    c1_[i] = c1_[i + 1] + i1;
  }
  c1_.front() = 0.5;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    c0_[i + 1] = c0_[i] + (nodes_[i + 1] - nodes_[i]) * c1_[i] - i2[i];
}

double CutoffChi::bump(double s) const { return s < 0.0 ? 1.0 : shoulder(s) + alpha_ * interior_bump(s); }
double CutoffChi::bump_d1(double s) const { return s < 0.0 ? 0.0 : shoulder_d1(s) + alpha_ * interior_bump_d1(s); }

double CutoffChi::bump_integral() const {
  const GaussRule rule = gauss_legendre(20);
  return composite([this](double s) { return bump(s); }, 0.0, 1.0, 512, rule);
}

std::size_t CutoffChi::panel(double s) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  if (i == 0) i = 1;
  if (i >= nodes_.size()) i = nodes_.size() - 1;
  return i - 1;
}

double CutoffChi::hermite(const std::vector<double>& f, const std::vector<double>& df, const std::vector<double>& d2f,
                          double s) const {
  const std::size_t i = panel(s);
  const double h = nodes_[i + 1] - nodes_[i];
  const double t = (s - nodes_[i]) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
  const double h3 = 0.5 * (t3 - 2.0 * t4 + t5);
  const double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  return f[i] * h0 + h * df[i] * h1 + h * h * d2f[i] * h2 + f[i + 1] * h5 + h * df[i + 1] * h4 + h * h * d2f[i + 1] * h3;
}

double CutoffChi::value(double s) const {
  if (s <= 0.5) return s - 0.5 * s * s;
  if (s >= 1.0) return limit();
  return hermite(c0_, c1_, c2_, s);
}

double CutoffChi::d1(double s) const {
  if (s <= 0.5) return 1.0 - s;
  if (s >= 1.0) return 0.0;
  return hermite(c1_, c2_, c3_, s);
}

Jet CutoffChi::of(const Jet& s) const {
  const double v = s.value();
  return s.compose(value(v), d1(v), d2(v), d3(v));
}

Jet CutoffChi::ratio(const Jet& s) const {
  if (s.value() <= 0.5) return 1.0 - 0.5 * s;
  return of(s) / s;
}

double CutoffBeta::value(double s) const { return 0.5 * smoothstep(s + 2.0); }
Jet CutoffBeta::of(const Jet& s) const { return 0.5 * smoothstep(s + 2.0); }

CutoffChi build_chi() { return CutoffChi(); }
CutoffBeta build_beta() { return CutoffBeta(); }

}  // namespace hemi
