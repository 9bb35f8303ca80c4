#pragma once

// One-dimensional cut-off profiles used by the gluing construction.

#include <vector>

#include "hemiglue/jet.hpp"

namespace hemi {

/// Exp-based smoothstep E(x) / (E(x) + E(1-x)), E(x) = exp(-1/x):
/// 0 for x <= 0, 1 for x >= 1, flat at both ends.
double smoothstep(double x);
Jet smoothstep(const Jet& x);

/// Concave profile chi with chi(0) = 0, chi'(0) = 1, chi'' = -bump, equal to
/// s - s^2/2 on [0, 1/2] and constant for s >= 1. The piece on [1/2, 1] is a
/// cumulative table with quintic Hermite interpolation; chi'' and chi''' are
/// always evaluated from the closed-form bump.
class CutoffChi {
 public:
  explicit CutoffChi(int nodes = 2048);

  /// The bump D + alpha P and its derivative.
  double bump(double s) const;
  double bump_d1(double s) const;
  double alpha() const noexcept { return alpha_; }
  /// Integral of the bump over [0, inf) by an independent composite rule.
  double bump_integral() const;

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const { return s < 0.0 ? -1.0 : -bump(s); }
  double d3(double s) const { return s < 0.0 ? 0.0 : -bump_d1(s); }
  /// chi at s = infinity.
  double limit() const noexcept { return c0_.back(); }
  int table_size() const noexcept { return static_cast<int>(nodes_.size()); }

  Jet of(const Jet& s) const;
  /// chi(s)/s, exact 1 - s/2 near the origin (s >= 0).
  Jet ratio(const Jet& s) const;

 private:
  std::size_t panel(double s) const;
  double hermite(const std::vector<double>& f, const std::vector<double>& df, const std::vector<double>& d2f,
                 double s) const;

  double alpha_ = 0.0;
  // chi and its first three derivatives at the table nodes.
  std::vector<double> nodes_, c0_, c1_, c2_, c3_;
};

/// beta(s) = 1/2 smoothstep(s + 2) on (-inf, 0]: 0 for s <= -2, 1/2 for s >= -1.
class CutoffBeta {
 public:
  double value(double s) const;
  Jet of(const Jet& s) const;
};

CutoffChi build_chi();
CutoffBeta build_beta();

}  // namespace hemi
