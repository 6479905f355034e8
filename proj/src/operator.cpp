#include "lieop/operator.hpp"

#include "lieop/linalg.hpp"

#include <cmath>

namespace lieop {

SecondOrderOperator::SecondOrderOperator(VarSet vars, const ExprMatrix& a, std::vector<Expr> b, bool check_psd)
    : vars_(std::move(vars)), b_(std::move(b)) {
  const std::size_t n = vars_.size();
  if (a.size() != n || b_.size() != n) throw DimensionError("operator coefficients do not match the variables");
  for (const auto& row : a)
    if (row.size() != n) throw DimensionError("second-order matrix must be square");
  a_.assign(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a_[i][j] = a_[j][i] = a[i][j];
  for (std::size_t i = 0; i < n; ++i) {
    if (max_var_index(b_[i]) >= static_cast<int>(n)) throw DimensionError("drift refers to an unknown variable");
    for (std::size_t j = 0; j < n; ++j)
      if (max_var_index(a_[i][j]) >= static_cast<int>(n))
        throw DimensionError("second-order coefficient refers to an unknown variable");
  }
  if (check_psd) {
    for (const auto& p : sample_points(n, {})) {
      double m = min_eigenvalue_symmetric(evaluate(a_, p));
      if (m < -1e-10) throw DomainError("second-order matrix is not positive semidefinite at a sampled point");
    }
  }
}

std::string to_string(const SecondOrderOperator& l) {
  const auto& names = l.vars().names();
  const std::size_t n = l.dim();
  std::vector<std::pair<bool, std::string>> parts;  // (negative, magnitude)
  auto term = [&](const Expr& c, const std::string& d) {
    if (c.is_zero()) return;
    std::string cs = to_string(c, l.vars());
    bool neg = false;
    if (cs.find(' ') != std::string::npos) {
      cs = "(" + cs + ")";
    } else if (cs.front() == '-') {
      neg = true;
      cs = cs.substr(1);
    }
    parts.emplace_back(neg, cs == "1" ? d : cs + "*" + d);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j)
        term(l.a(i, i), "d_" + names[i] + "^2");
      else
        term(Expr(2) * l.a(i, j), "d_" + names[i] + "*d_" + names[j]);
    }
  for (std::size_t j = 0; j < n; ++j) term(l.b()[j], "d_" + names[j]);
  if (parts.empty()) return "0";
  std::string out = (parts[0].first ? "-" : "") + parts[0].second;
  for (std::size_t k = 1; k < parts.size(); ++k) out += (parts[k].first ? " - " : " + ") + parts[k].second;
  return out;
}

namespace {

std::vector<std::string> xs(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

ExprMatrix zeros(std::size_t n) { return ExprMatrix(n, std::vector<Expr>(n)); }

}  // namespace

SecondOrderOperator laplacian(std::size_t n) {
  ExprMatrix a = zeros(n);
  for (std::size_t i = 0; i < n; ++i) a[i][i] = Expr(1);
  return SecondOrderOperator(VarSet(xs(n)), a, std::vector<Expr>(n));
}

SecondOrderOperator heat_operator(std::size_t n) {
  auto names = xs(n);
  names.push_back("t");
  ExprMatrix a = zeros(n + 1);
  for (std::size_t i = 0; i < n; ++i) a[i][i] = Expr(1);
  std::vector<Expr> b(n + 1);
  b[n] = Expr(-1);
  return SecondOrderOperator(VarSet(names, n), a, b);
}

SecondOrderOperator from_frame(const std::vector<VectorField>& fields, const std::optional<VectorField>& drift,
                               const VarSet& vars, const std::vector<Rational>& weights) {
  if (fields.empty()) throw DomainError("from_frame needs at least one field");
  const std::size_t n = vars.size();
  if (!weights.empty() && weights.size() != fields.size()) throw DimensionError("one weight per field");
  ExprMatrix a = zeros(n);
  std::vector<std::vector<Expr>> bterms(n);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const auto& f = fields[k];
    if (f.dim() != n) throw DimensionError("field dimension differs from the variables");
    Rational w = weights.empty() ? Rational(1) : weights[k];
    if (w < 0) throw DomainError("frame weights must be non-negative");
    if (w == 0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) a[i][j] += Expr(w) * f.coeffs[i] * f.coeffs[j];
    // X(X u) = sum c_i c_j u_ij + sum_j X(c_j) u_j
    for (std::size_t j = 0; j < n; ++j) bterms[j].push_back(Expr(w) * apply_field(f, f.coeffs[j]));
  }
  std::vector<Expr> b(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (drift) {
      if (drift->dim() != n) throw DimensionError("drift dimension differs from the variables");
      bterms[j].push_back(drift->coeffs[j]);
    }
    b[j] = Expr::sum(std::move(bterms[j]));
  }
  return SecondOrderOperator(vars, a, b);
}

namespace {

Expr apply_coefficients(const ExprMatrix& a, const std::vector<Expr>& b, const Expr& u) {
  const std::size_t n = b.size();
  if (max_var_index(u) >= static_cast<int>(n)) throw DimensionError("function depends on variables outside the operator's space");
  std::vector<Expr> terms;
  for (std::size_t j = 0; j < n; ++j) {
    Expr uj = differentiate(u, static_cast<int>(j));
    if (uj.is_zero()) continue;
    if (!b[j].is_zero()) terms.push_back(b[j] * uj);
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i][j].is_zero()) continue;
      Expr uij = differentiate(uj, static_cast<int>(i));
      if (!uij.is_zero()) terms.push_back(a[i][j] * uij);
    }
  }
  return Expr::sum(std::move(terms));
}

}  // namespace

Expr apply(const SecondOrderOperator& l, const Expr& u) { return apply_coefficients(l.a(), l.b(), u); }

Expr apply(const AdjointOperator& l, const Expr& u) { return apply_coefficients(l.a, l.b, u) + l.c * u; }

DecomposedOperator decompose(const SecondOrderOperator& l) {
  const std::size_t n = l.dim();
  DecomposedOperator d;
  for (std::size_t i = 0; i < n; ++i) {
    VectorField f;
    f.label = "X" + std::to_string(i + 1);
    for (std::size_t j = 0; j < n; ++j) f.coeffs.push_back(l.a(i, j));
    d.fields.push_back(std::move(f));
  }
  d.drift.label = "X0";
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Expr> terms{l.b()[j]};
    for (std::size_t i = 0; i < n; ++i) terms.push_back(-differentiate(l.a(i, j), static_cast<int>(i)));
    d.drift.coeffs.push_back(Expr::sum(std::move(terms)));
  }
  return d;
}

Expr apply(const DecomposedOperator& d, const Expr& u) {
  std::vector<Expr> terms{apply_field(d.drift, u)};
  for (std::size_t i = 0; i < d.fields.size(); ++i)
    terms.push_back(differentiate(apply_field(d.fields[i], u), static_cast<int>(i)));
  return Expr::sum(std::move(terms));
}

Expr psi_a(const SecondOrderOperator& l, const Expr& u) {
  const std::size_t n = l.dim();
  std::vector<Expr> grad;
  for (std::size_t i = 0; i < n; ++i) grad.push_back(differentiate(u, static_cast<int>(i)));
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!l.a(i, j).is_zero() && !grad[i].is_zero() && !grad[j].is_zero())
        terms.push_back(l.a(i, j) * grad[i] * grad[j]);
  return Expr::sum(std::move(terms));
}

ScalarFunction scalar_function(const Expr& f, std::string name) {
  if (max_var_index(f) > 0) throw DimensionError("scalar function must depend on one variable only");
  auto c0 = std::make_shared<CompiledExpr>(f);
  auto c1 = std::make_shared<CompiledExpr>(differentiate(f, 0));
  auto c2 = std::make_shared<CompiledExpr>(differentiate(differentiate(f, 0), 0));
  auto wrap = [](std::shared_ptr<CompiledExpr> c) {
    return [c](long double s) {
      long double p[1] = {s};
      return c->eval_ld(p);
    };
  };
  return {std::move(name), wrap(c0), wrap(c1), wrap(c2)};
}

namespace {

SampleSpec unit_box(const SampleSpec& s) {
  SampleSpec out = s;
  out.lo = -1;
  out.hi = 1;
  return out;
}

struct RightSide {
  CompiledExpr u, lu, psi;
};

// Second-order finite differences of g at x in extended precision, with one Richardson step.
class FiniteDifferences {
 public:
  FiniteDifferences(std::function<long double(std::span<const long double>)> g, std::vector<long double> x)
      : g_(std::move(g)), x_(std::move(x)) {}

  long double first(std::size_t i) const {
    auto d = [&](long double h) { return (at({{i, h}}) - at({{i, -h}})) / (2 * h); };
    return (4 * d(kH / 2) - d(kH)) / 3;
  }
  long double second(std::size_t i, std::size_t j) const {
    if (i == j) {
      const long double g0 = at({});
      auto s = [&](long double h) { return (at({{i, h}}) - 2 * g0 + at({{i, -h}})) / (h * h); };
      return (4 * s(kH / 2) - s(kH)) / 3;
    }
    auto m = [&](long double h) {
      return (at({{i, h}, {j, h}}) - at({{i, h}, {j, -h}}) - at({{i, -h}, {j, h}}) + at({{i, -h}, {j, -h}})) /
             (4 * h * h);
    };
    return (4 * m(kH / 2) - m(kH)) / 3;
  }

 private:
  static constexpr long double kH = 1e-4L;
  long double at(std::initializer_list<std::pair<std::size_t, long double>> shifts) const {
    std::vector<long double> y = x_;
    for (const auto& [k, h] : shifts) y[k] += h;
    return g_(y);
  }
  std::function<long double(std::span<const long double>)> g_;
  std::vector<long double> x_;
};

}  // namespace

ChainRuleResult chain_rule_residual(const SecondOrderOperator& l, const Expr& u, const ScalarFunction& f,
                                    const SampleSpec& samples) {
  const std::size_t n = l.dim();
  CompiledExpr cu(u), clu(apply(l, u)), cpsi(psi_a(l, u));
  std::vector<std::vector<CompiledExpr>> ca(n);
  std::vector<CompiledExpr> cb;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ca[i].emplace_back(l.a(i, j));
    cb.emplace_back(l.b()[i]);
  }
  ChainRuleResult r;
  r.method = "finite differences (h=1e-4, Richardson, extended precision) for " + f.name;
  for (const auto& p : sample_points(n, unit_box(samples))) {
    std::vector<long double> x(p.begin(), p.end());
    FiniteDifferences fd([&](std::span<const long double> y) { return f.f(cu.eval_ld(y)); }, x);
    long double lhs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!l.b()[i].is_zero()) lhs += static_cast<long double>(cb[i](p)) * fd.first(i);
      for (std::size_t j = 0; j < n; ++j)
        if (!l.a(i, j).is_zero()) lhs += static_cast<long double>(ca[i][j](p)) * fd.second(i, j);
    }
    const long double uv = cu.eval_ld(x);
    const long double rhs = f.d1(uv) * clu.eval_ld(x) + f.d2(uv) * cpsi.eval_ld(x);
    r.residual = std::max(r.residual, static_cast<double>(std::abs(lhs - rhs)));
    ++r.points;
  }
  return r;
}

ChainRuleResult chain_rule_residual(const SecondOrderOperator& l, const Expr& u, const Expr& f,
                                    const SampleSpec& samples) {
  std::optional<Expr> composed;
  try {
    composed = substitute(f, std::vector<Expr>{u});
  } catch (const NonAffineError&) {
  }
  if (!composed) return chain_rule_residual(l, u, scalar_function(f, "F"), samples);
  const std::size_t n = l.dim();
  Expr f1 = differentiate(f, 0), f2 = differentiate(f1, 0);
  Expr rhs = substitute(f1, std::vector<Expr>{u}) * apply(l, u) + substitute(f2, std::vector<Expr>{u}) * psi_a(l, u);
  CompiledExpr cl(apply(l, *composed)), cr(rhs);
  ChainRuleResult r;
  r.method = "symbolic composition";
  for (const auto& p : sample_points(n, unit_box(samples))) {
    r.residual = std::max(r.residual, std::abs(cl(p) - cr(p)));
    ++r.points;
  }
  return r;
}

NdReport check_nd(const SecondOrderOperator& l, const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw DomainError("check_nd needs at least one point");
  NdReport rep;
  rep.nondegenerate = true;
  for (const auto& p : points) {
    Eigen::MatrixXd a = evaluate(l.a(), p);
    bool ok = a.cwiseAbs().maxCoeff() > 1e-12;
    rep.per_point.push_back(ok);
    rep.nondegenerate = rep.nondegenerate && ok;
  }
  rep.note = "A(x) != 0 checked at " + std::to_string(points.size()) +
             " points; under left invariance one point suffices";
  return rep;
}

double check_left_invariance(const SecondOrderOperator& l, const GroupLaw& g, const SampleSpec& samples) {
  const std::size_t n = l.dim();
  if (g.dim != n) throw DimensionError("operator and group dimensions differ");
  // d^2 (g.x)_k / dx_i dx_j
  std::vector<std::vector<std::vector<CompiledExpr>>> hess(n, std::vector<std::vector<CompiledExpr>>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) hess[k][i].emplace_back(differentiate(g.d_right[k][i], static_cast<int>(n + j)));
  std::vector<std::vector<CompiledExpr>> ca(n);
  std::vector<CompiledExpr> cb;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ca[i].emplace_back(l.a(i, j));
    cb.emplace_back(l.b()[i]);
  }
  struct Probe {
    std::vector<CompiledExpr> grad;
    std::vector<std::vector<CompiledExpr>> hess;
  };
  std::vector<Probe> bank;
  for (const auto& u : invariance_bank(n)) {
    Probe pr;
    pr.hess.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Expr ui = differentiate(u, static_cast<int>(i));
      pr.grad.emplace_back(ui);
      for (std::size_t j = 0; j < n; ++j) pr.hess[i].emplace_back(differentiate(ui, static_cast<int>(j)));
    }
    bank.push_back(std::move(pr));
  }
  double worst = 0;
  for (const auto& p : sample_points(2 * n, unit_box(samples))) {
    std::span<const double> gp(p.data(), n), xp(p.data() + n, n);
    std::vector<double> gx = multiply(g, gp, xp);
    Eigen::MatrixXd jt = translation_jacobian(g, Side::Left, gp, xp);
    Eigen::MatrixXd ax(n, n), agx(n, n);
    Eigen::VectorXd bx(n), bgx(n);
    for (std::size_t i = 0; i < n; ++i) {
      bx(i) = cb[i](xp);
      bgx(i) = cb[i](gx);
      for (std::size_t j = 0; j < n; ++j) {
        ax(i, j) = ca[i][j](xp);
        agx(i, j) = ca[i][j](gx);
      }
    }
    std::vector<Eigen::MatrixXd> h(n, Eigen::MatrixXd(n, n));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h[k](i, j) = hess[k][i][j](p);
    for (const auto& pr : bank) {
      Eigen::VectorXd du(n);
      Eigen::MatrixXd d2u(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        du(i) = pr.grad[i](gx);
        for (std::size_t j = 0; j < n; ++j) d2u(i, j) = pr.hess[i][j](gx);
      }
      // v = u o tau_g: grad v = J^T du, hess v = J^T d2u J + sum_k du_k H_k
      Eigen::VectorXd dv = jt.transpose() * du;
      Eigen::MatrixXd d2v = jt.transpose() * d2u * jt;
      for (std::size_t k = 0; k < n; ++k) d2v += du(k) * h[k];
      double lhs = (ax.cwiseProduct(d2v)).sum() + bx.dot(dv);
      double rhs = (agx.cwiseProduct(d2u)).sum() + bgx.dot(du);
      worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::abs(rhs)));
    }
  }
  return worst;
}

AdjointOperator formal_adjoint(const SecondOrderOperator& l) {
  const std::size_t n = l.dim();
  AdjointOperator out;
  out.vars = l.vars();
  out.a = l.a();
  std::vector<Expr> cterms;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Expr> terms{-l.b()[j]};
    for (std::size_t i = 0; i < n; ++i) {
      Expr dia = differentiate(l.a(i, j), static_cast<int>(i));
      terms.push_back(Expr(2) * dia);
      cterms.push_back(differentiate(dia, static_cast<int>(j)));
    }
    out.b.push_back(Expr::sum(std::move(terms)));
    cterms.push_back(-differentiate(l.b()[j], static_cast<int>(j)));
  }
  out.c = Expr::sum(std::move(cterms));
  return out;
}

std::string to_string(Harmonicity h) {
  switch (h) {
    case Harmonicity::Harmonic: return "harmonic";
    case Harmonicity::Subharmonic: return "subharmonic";
    case Harmonicity::Superharmonic: return "superharmonic";
    case Harmonicity::None: return "none";
  }
  return "none";
}

Classification classify(const SecondOrderOperator& l, const Expr& u, const SampleSpec& samples) {
  Expr lu = apply(l, u);
  Classification c;
  c.exact_zero = lu.is_zero();
  CompiledExpr cl(lu);
  bool first = true;
  for (const auto& p : sample_points(l.dim(), samples)) {
    double v = cl(p);
    c.min_value = first ? v : std::min(c.min_value, v);
    c.max_value = first ? v : std::max(c.max_value, v);
    first = false;
    ++c.points;
  }
  const double tol = 1e-10;
  if (c.exact_zero || equal_on_samples(lu, Expr(0), l.dim(), samples))
    c.kind = Harmonicity::Harmonic;
  else if (c.min_value >= -tol)
    c.kind = Harmonicity::Subharmonic;
  else if (c.max_value <= tol)
    c.kind = Harmonicity::Superharmonic;
  else
    c.kind = Harmonicity::None;
  return c;
}

ConstancyConditions constancy_conditions(const SecondOrderOperator& l, const Expr& u) {
  const std::size_t n = l.dim();
  auto vanishes = [&](const Expr& e) { return equal_on_samples(e, Expr(0), n); };
  ConstancyConditions c;
  bool all_partials_zero = true;
  for (std::size_t i = 0; i < n; ++i) all_partials_zero = all_partials_zero && vanishes(differentiate(u, static_cast<int>(i)));
  c.constant = all_partials_zero;
  auto d = decompose(l);
  bool x0 = vanishes(apply_field(d.drift, u));
  bool xs_zero = x0;
  for (const auto& f : d.fields) xs_zero = xs_zero && vanishes(apply_field(f, u));
  c.fields_vanish = xs_zero;
  bool psi = vanishes(psi_a(l, u));
  c.psi_and_drift_vanish = psi && x0;
  c.harmonic_and_psi_vanish = psi && vanishes(apply(l, u));
  return c;
}

}  // namespace lieop
