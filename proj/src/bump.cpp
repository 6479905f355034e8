#include "lieop/bump.hpp"

namespace lieop {

bool CompactFunction::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) throw DimensionError("point has the wrong length");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double CompactFunction::operator()(std::span<const double> x) const {
  if (!contains(x)) return 0.0;
  return compiled ? (*compiled)(x) : evaluate(core, x);
}

CompactFunction polynomial_bump(const std::vector<Rational>& center, const std::vector<Rational>& radius,
                                unsigned power) {
  if (center.size() != radius.size()) throw DimensionError("center and radius differ in length");
  CompactFunction out;
  std::vector<Expr> factors;
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (radius[i] <= 0) throw DomainError("bump radius must be positive");
    Expr s = (Expr::variable(static_cast<int>(i)) - Expr(center[i])) / radius[i];
    factors.push_back(pow(Expr(1) - s * s, power));
    out.lo.push_back(to_double(center[i] - radius[i]));
    out.hi.push_back(to_double(center[i] + radius[i]));
  }
  out.core = Expr::product(std::move(factors));
  out.compiled = std::make_shared<const CompiledExpr>(out.core);
  return out;
}

}  // namespace lieop
