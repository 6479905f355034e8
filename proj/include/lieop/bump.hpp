#pragma once

#include "lieop/symbolic.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace lieop {

using PointFunction = std::function<double(std::span<const double>)>;

/// A function equal to `core` inside the box [lo, hi] and to 0 outside.
struct CompactFunction {
  Expr core;
  std::vector<double> lo;
  std::vector<double> hi;
  /// Optional compiled form of `core`, used by operator() when present.
  std::shared_ptr<const CompiledExpr> compiled;

  bool contains(std::span<const double> x) const;
  double operator()(std::span<const double> x) const;
};

/// prod_i (1 - ((x_i - c_i) / r_i)^2)^power on the box c +- r. With power >= 3
/// the zero extension is C^2, so it can be paired with second-order operators.
CompactFunction polynomial_bump(const std::vector<Rational>& center, const std::vector<Rational>& radius,
                                unsigned power = 3);

}  // namespace lieop
