#include "lieop/group.hpp"

#include "lieop/matexp.hpp"
#include "lieop/quadrature.hpp"

#include <cmath>

namespace lieop {

std::string to_string(GroupFamily f) {
  switch (f) {
    case GroupFamily::Abelian: return "abelian";
    case GroupFamily::MatrixExponential: return "matrix_exponential";
    case GroupFamily::InverseMatrixExponential: return "inverse_matrix_exponential";
    case GroupFamily::ProductWithTime: return "product_with_time";
    case GroupFamily::Custom: return "custom";
  }
  return "custom";
}

void finalize(GroupLaw& g) {
  if (g.product.size() != g.dim || g.identity.size() != g.dim || g.vars.size() != g.dim)
    throw DimensionError("group law: product, identity and variables must all have dim entries");
  if (g.inverse && g.inverse->size() != g.dim) throw DimensionError("group law: inverse has the wrong length");
  for (const auto& p : g.product)
    if (max_var_index(p) >= static_cast<int>(2 * g.dim))
      throw DimensionError("group law: product refers to a variable beyond the two factors");
  g.d_left = jacobian(g.product, 0, g.dim);
  g.d_right = jacobian(g.product, static_cast<int>(g.dim), g.dim);
  g.compiled.clear();
  for (const auto& p : g.product) g.compiled.emplace_back(p);
}

namespace {

std::vector<std::string> x_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

VarSet time_space_vars(std::size_t n) {
  std::vector<std::string> names{"t"};
  for (auto& s : x_names(n)) names.push_back(s);
  return VarSet(names, 0);
}

void require_square(const RationalMatrix& b) {
  if (!b.square() || b.rows() == 0) throw DimensionError("B must be a non-empty square matrix");
}

}  // namespace

GroupLaw make_abelian(std::size_t n) {
  if (n == 0) throw DomainError("dimension must be positive");
  GroupLaw g;
  g.dim = n;
  g.vars = VarSet(x_names(n));
  for (std::size_t i = 0; i < n; ++i)
    g.product.push_back(Expr::variable(static_cast<int>(i)) + Expr::variable(static_cast<int>(n + i)));
  g.identity.assign(n, Rational(0));
  std::vector<Expr> inv;
  for (std::size_t i = 0; i < n; ++i) inv.push_back(-Expr::variable(static_cast<int>(i)));
  g.inverse = inv;
  g.family = GroupFamily::Abelian;
  finalize(g);
  return g;
}

namespace {

// (-t, -exp(-tB) x) in variables (t, x).
std::vector<Expr> time_space_inverse(const RationalMatrix& b) {
  const std::size_t n = b.rows();
  auto em = symbolic_exp(-b, 0);
  std::vector<Expr> x = variables(1, n);
  std::vector<Expr> inv{-Expr::variable(0)};
  for (const auto& e : multiply(em.entries, x)) inv.push_back(-e);
  return inv;
}

}  // namespace

GroupLaw make_matrix_exponential(const RationalMatrix& b) {
  require_square(b);
  const std::size_t n = b.rows(), dim = n + 1;
  auto em = symbolic_exp(b, 0);
  GroupLaw g;
  g.dim = dim;
  g.vars = time_space_vars(n);
  g.product.push_back(Expr::variable(0) + Expr::variable(static_cast<int>(dim)));
  auto moved = multiply(em.entries, variables(static_cast<int>(dim) + 1, n));
  for (std::size_t i = 0; i < n; ++i) g.product.push_back(Expr::variable(static_cast<int>(1 + i)) + moved[i]);
  g.identity.assign(dim, Rational(0));
  g.inverse = time_space_inverse(b);
  g.family = GroupFamily::MatrixExponential;
  g.matrix = b;
  g.numeric_coefficients = em.numeric_coefficients;
  finalize(g);
  return g;
}

GroupLaw make_inverse_matrix_exponential(const RationalMatrix& b) {
  require_square(b);
  const std::size_t n = b.rows(), dim = n + 1;
  auto em = symbolic_exp(b, static_cast<int>(dim));  // exp(t'B)
  GroupLaw g;
  g.dim = dim;
  g.vars = time_space_vars(n);
  g.product.push_back(Expr::variable(0) + Expr::variable(static_cast<int>(dim)));
  auto moved = multiply(em.entries, variables(1, n));
  for (std::size_t i = 0; i < n; ++i)
    g.product.push_back(Expr::variable(static_cast<int>(dim + 1 + i)) + moved[i]);
  g.identity.assign(dim, Rational(0));
  g.inverse = time_space_inverse(b);
  g.family = GroupFamily::InverseMatrixExponential;
  g.matrix = b;
  g.numeric_coefficients = em.numeric_coefficients;
  finalize(g);
  return g;
}

GroupLaw make_product_with_time(const GroupLaw& inner) {
  const std::size_t m = inner.dim, dim = m + 1;
  std::vector<std::string> names = inner.vars.names();
  std::string tname = "t";
  while (inner.vars.index_of(tname)) tname += "0";
  names.push_back(tname);
  // inner left block keeps 0..m-1, inner right block moves from m.. to m+1..
  std::vector<Expr> remap;
  for (std::size_t i = 0; i < m; ++i) remap.push_back(Expr::variable(static_cast<int>(i)));
  for (std::size_t i = 0; i < m; ++i) remap.push_back(Expr::variable(static_cast<int>(dim + i)));
  GroupLaw g;
  g.dim = dim;
  g.vars = VarSet(names, m);
  for (const auto& p : inner.product) g.product.push_back(substitute(p, remap));
  g.product.push_back(Expr::variable(static_cast<int>(m)) + Expr::variable(static_cast<int>(dim + m)));
  g.identity = inner.identity;
  g.identity.push_back(0);
  if (inner.inverse) {
    std::vector<Expr> inv = *inner.inverse;
    inv.push_back(-Expr::variable(static_cast<int>(m)));
    g.inverse = inv;
  }
  g.family = GroupFamily::ProductWithTime;
  g.inner = std::make_shared<const GroupLaw>(inner);
  g.numeric_coefficients = inner.numeric_coefficients;
  finalize(g);
  return g;
}

GroupLaw make_custom(VarSet vars, std::vector<Expr> product, std::vector<Rational> identity,
                     std::optional<std::vector<Expr>> inverse) {
  GroupLaw g;
  g.dim = vars.size();
  g.vars = std::move(vars);
  g.product = std::move(product);
  g.identity = std::move(identity);
  g.inverse = std::move(inverse);
  g.family = GroupFamily::Custom;
  finalize(g);
  return g;
}

GroupLaw make_group(GroupFamily family, const std::optional<RationalMatrix>& b, const GroupLaw* inner,
                    std::size_t n) {
  switch (family) {
    case GroupFamily::Abelian:
      if (b || inner) throw DomainError("abelian family takes only a dimension");
      return make_abelian(n);
    case GroupFamily::MatrixExponential:
    case GroupFamily::InverseMatrixExponential:
      if (!b) throw DomainError(to_string(family) + " needs a matrix B");
      if (inner) throw DomainError(to_string(family) + " takes no inner group");
      return family == GroupFamily::MatrixExponential ? make_matrix_exponential(*b)
                                                      : make_inverse_matrix_exponential(*b);
    case GroupFamily::ProductWithTime:
      if (!inner) throw DomainError("product_with_time needs an inner group");
      if (b) throw DomainError("product_with_time takes no matrix");
      return make_product_with_time(*inner);
    case GroupFamily::Custom: throw DomainError("custom groups are built with make_custom");
  }
  throw DomainError("unknown group family");
}

std::vector<double> multiply(const GroupLaw& g, std::span<const double> x, std::span<const double> y) {
  if (x.size() != g.dim || y.size() != g.dim) throw DimensionError("group element has the wrong length");
  std::vector<double> xy(x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  std::vector<double> out(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) out[i] = g.compiled[i](xy);
  return out;
}

namespace {

std::vector<double> identity_point(const GroupLaw& g) {
  std::vector<double> e;
  for (const auto& v : g.identity) e.push_back(to_double(v));
  return e;
}

Eigen::MatrixXd eval_block(const ExprMatrix& m, std::span<const double> x, std::span<const double> y) {
  std::vector<double> xy(x.begin(), x.end());
  xy.insert(xy.end(), y.begin(), y.end());
  return evaluate(m, xy);
}

double rel_residual(std::span<const double> a, std::span<const double> b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / (1 + std::abs(b[i])));
  return worst;
}

}  // namespace

std::vector<double> invert(const GroupLaw& g, std::span<const double> x) {
  if (g.inverse) {
    std::vector<double> out;
    for (const auto& e : *g.inverse) out.push_back(evaluate(e, x));
    return out;
  }
  const auto e = identity_point(g);
  std::vector<double> y(g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) y[i] = 2 * e[i] - x[i];
  for (int iter = 0; iter < 60; ++iter) {
    auto f = multiply(g, x, y);
    Eigen::VectorXd r(g.dim);
    for (std::size_t i = 0; i < g.dim; ++i) r(i) = f[i] - e[i];
    if (r.norm() < 1e-12) break;
    Eigen::MatrixXd j = eval_block(g.d_right, x, y);
    Eigen::VectorXd step = j.fullPivLu().solve(r);
    for (std::size_t i = 0; i < g.dim; ++i) y[i] -= step(i);
  }
  return y;
}

Eigen::MatrixXd translation_jacobian(const GroupLaw& g, Side side, std::span<const double> gpt,
                                     std::span<const double> at) {
  if (gpt.size() != g.dim || at.size() != g.dim) throw DimensionError("point has the wrong length");
  if (side == Side::Right) return eval_block(g.d_left, at, gpt);
  return eval_block(g.d_right, gpt, at);
}

ExprMatrix translation_jacobian_at_identity(const GroupLaw& g, Side side) {
  // Right: d/dy (y . x) at y = e; left: d/dy (x . y) at y = e. Result in variables x.
  std::vector<Expr> rep(2 * g.dim);
  for (std::size_t i = 0; i < g.dim; ++i) {
    Expr e(g.identity[i]);
    Expr x = Expr::variable(static_cast<int>(i));
    rep[i] = side == Side::Right ? e : x;
    rep[g.dim + i] = side == Side::Right ? x : e;
  }
  const ExprMatrix& block = side == Side::Right ? g.d_left : g.d_right;
  ExprMatrix out(g.dim, std::vector<Expr>(g.dim));
  for (std::size_t i = 0; i < g.dim; ++i)
    for (std::size_t j = 0; j < g.dim; ++j) out[i][j] = substitute(block[i][j], rep);
  return out;
}

namespace {

// 1/|d| inside the ring: constants, c*exp(l), or numerically recognized c*exp(l).
std::optional<Expr> reciprocal(const Expr& d, std::size_t dim, const SampleSpec& samples, std::string& note) {
  if (d.is_constant()) {
    if (d.is_zero()) return std::nullopt;
    note = "constant Jacobian determinant";
    return Expr(Rational(1) / abs(d.constant_value()));
  }
  if (d.kind() == ExprKind::Exp) {
    note = "exponential Jacobian determinant";
    return Expr::exp(d.affine().scaled(-1));
  }
  if (d.kind() == ExprKind::Product && d.args().size() == 2 && d.args()[0].is_constant() &&
      d.args()[1].kind() == ExprKind::Exp) {
    note = "exponential Jacobian determinant";
    return Expr(Rational(1) / abs(d.args()[0].constant_value())) * Expr::exp(d.args()[1].affine().scaled(-1));
  }
  // Numeric recognition: fit log|d| by an affine form, rationalize, verify.
  SampleSpec fit = samples;
  fit.lo = -1;
  fit.hi = 1;
  auto pts = sample_points(dim, fit);
  CompiledExpr cd(d);
  Eigen::MatrixXd a(pts.size(), dim + 1);
  Eigen::VectorXd rhs(pts.size());
  double sign = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double v = cd(pts[k]);
    if (v == 0 || !std::isfinite(v)) return std::nullopt;
    if (sign == 0) sign = v > 0 ? 1 : -1;
    if (v * sign <= 0) return std::nullopt;
    a(k, 0) = 1;
    for (std::size_t i = 0; i < dim; ++i) a(k, i + 1) = pts[k][i];
    rhs(k) = std::log(std::abs(v));
  }
  Eigen::VectorXd coef = a.colPivHouseholderQr().solve(rhs);
  Affine ell;
  for (std::size_t i = 0; i < dim; ++i) {
    auto r = rationalize(coef(i + 1), 1000, 1e-7);
    if (!r) return std::nullopt;
    if (*r != 0) ell.terms.emplace_back(static_cast<int>(i), -*r);
  }
  auto c = rationalize(std::exp(-coef(0)), 1000, 1e-9 * std::max(1.0, std::exp(-coef(0))));
  if (!c || *c <= 0) return std::nullopt;
  Expr w = Expr(*c) * Expr::exp(ell);
  for (const auto& p : sample_points(dim, samples)) {
    double prod = evaluate(w, p) * std::abs(cd(p));
    if (!(std::abs(prod - 1) <= 1e-9)) return std::nullopt;
  }
  note = "numerically recognized exponential Jacobian determinant";
  return w;
}

DensityFn density(const GroupLaw& g, Side side, const SampleSpec& samples) {
  Expr d = determinant(translation_jacobian_at_identity(g, side));
  for (const auto& p : sample_points(g.dim, samples))
    if (evaluate(d, p) == 0) throw DomainError("translation Jacobian is singular at a sampled point");
  std::string note;
  auto w = reciprocal(d, g.dim, samples, note);
  if (!w) throw DomainError("1/det of the translation Jacobian is not representable as c*exp(affine)");
  return {*w, note};
}

}  // namespace

DensityFn right_invariant_density(const GroupLaw& g, const SampleSpec& samples) {
  return density(g, Side::Right, samples);
}

DensityFn left_invariant_density(const GroupLaw& g, const SampleSpec& samples) {
  return density(g, Side::Left, samples);
}

GroupCheck check_group(const GroupLaw& g, const SampleSpec& samples) {
  GroupCheck c;
  c.inverse_closed_form = g.inverse.has_value();
  const auto e = identity_point(g);
  const std::size_t n = g.dim;
  for (const auto& p : sample_points(3 * n, samples)) {
    std::span<const double> x(p.data(), n), y(p.data() + n, n), z(p.data() + 2 * n, n);
    c.identity_residual = std::max(c.identity_residual, rel_residual(multiply(g, e, x), x));
    c.identity_residual = std::max(c.identity_residual, rel_residual(multiply(g, x, e), x));
    auto xy_z = multiply(g, multiply(g, x, y), z);
    auto x_yz = multiply(g, x, multiply(g, y, z));
    c.associativity_residual = std::max(c.associativity_residual, rel_residual(xy_z, x_yz));
    auto xi = invert(g, x);
    c.inverse_residual = std::max(c.inverse_residual, rel_residual(multiply(g, x, xi), e));
    c.inverse_residual = std::max(c.inverse_residual, rel_residual(multiply(g, xi, x), e));
  }
  return c;
}

double right_invariance_residual(const GroupLaw& g, const DensityFn& w, const SampleSpec& samples) {
  const std::size_t n = g.dim;
  CompiledExpr cw(w.w);
  double worst = 0;
  for (const auto& p : sample_points(2 * n, samples)) {
    std::span<const double> y(p.data(), n), x(p.data() + n, n);
    auto yx = multiply(g, y, x);
    double lhs = cw(yx) * std::abs(translation_jacobian(g, Side::Right, x, y).determinant());
    double rhs = cw(y);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

UnimodularReport unimodularity(const GroupLaw& g, const SampleSpec& samples, double rtol) {
  ExprMatrix jl = translation_jacobian_at_identity(g, Side::Left);
  ExprMatrix jr = translation_jacobian_at_identity(g, Side::Right);
  // left density / right density = det J_rho / det J_tau
  UnimodularReport rep;
  std::optional<double> first;
  for (const auto& p : sample_points(g.dim, samples)) {
    double ratio = std::abs(evaluate(jr, p).determinant() / evaluate(jl, p).determinant());
    if (!first) first = ratio;
    rep.max_ratio_deviation = std::max(rep.max_ratio_deviation, std::abs(ratio - *first) / std::abs(*first));
  }
  rep.unimodular = rep.max_ratio_deviation <= rtol;
  return rep;
}

double haar_mass_partial(const DensityFn& w, std::size_t dim, double r, std::size_t order) {
  if (!(r > 0)) throw DomainError("radius must be positive");
  CompiledExpr cw(w.w);
  std::vector<double> lo(dim, -r), hi(dim, r);
  return integrate_box([&](std::span<const double> x) { return cw(x); }, lo, hi, order);
}

double haar_mass_partial(const GroupLaw& g, double r, std::size_t order) {
  return haar_mass_partial(right_invariant_density(g), g.dim, r, order);
}

}  // namespace lieop
