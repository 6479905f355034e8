#include "lieop/fields.hpp"

#include "lieop/linalg.hpp"

#include <cmath>

namespace lieop {

bool VectorField::is_zero() const {
  for (const auto& c : coeffs)
    if (!c.is_zero()) return false;
  return true;
}

VectorField coordinate_field(const VarSet& vars, std::size_t i) {
  VectorField f;
  f.coeffs.assign(vars.size(), Expr());
  f.coeffs.at(i) = Expr(1);
  f.label = "d_" + vars.name(i);
  return f;
}

std::vector<VectorField> coordinate_frame(const VarSet& vars) {
  std::vector<VectorField> out;
  for (std::size_t i = 0; i < vars.size(); ++i) out.push_back(coordinate_field(vars, i));
  return out;
}

Expr apply_field(const VectorField& x, const Expr& u) {
  if (max_var_index(u) >= static_cast<int>(x.dim())) throw DimensionError("function depends on variables outside the field's space");
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (x.coeffs[i].is_zero()) continue;
    Expr d = differentiate(u, static_cast<int>(i));
    if (!d.is_zero()) terms.push_back(x.coeffs[i] * d);
  }
  return Expr::sum(std::move(terms));
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (x.dim() != y.dim()) throw DimensionError("bracket of fields of different dimension");
  VectorField out;
  out.label = "[" + x.label + "," + y.label + "]";
  for (std::size_t i = 0; i < x.dim(); ++i) out.coeffs.push_back(apply_field(x, y.coeffs[i]) - apply_field(y, x.coeffs[i]));
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim()) throw DimensionError("sum of fields of different dimension");
  VectorField out;
  out.label = a.label + "+" + b.label;
  for (std::size_t i = 0; i < a.dim(); ++i) out.coeffs.push_back(a.coeffs[i] + b.coeffs[i]);
  return out;
}

VectorField operator*(const Expr& c, const VectorField& a) {
  VectorField out;
  out.label = a.label;
  for (const auto& e : a.coeffs) out.coeffs.push_back(c * e);
  return out;
}

std::vector<VectorField> left_invariant_frame(const GroupLaw& g) {
  ExprMatrix j = translation_jacobian_at_identity(g, Side::Left);
  std::vector<VectorField> out;
  for (std::size_t c = 0; c < g.dim; ++c) {
    VectorField f;
    f.label = "X_" + g.vars.name(c);
    for (std::size_t r = 0; r < g.dim; ++r) f.coeffs.push_back(j[r][c]);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Expr> invariance_bank(std::size_t dim) {
  std::vector<Expr> bank;
  auto v = [](std::size_t i) { return Expr::variable(static_cast<int>(i)); };
  for (std::size_t i = 0; i < dim; ++i) bank.push_back(v(i));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) bank.push_back(v(i) * v(j));
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t j = (i + 1) % dim;
    Affine a = Affine::variable(static_cast<int>(i), Rational(3, 10));
    if (j != i) a = a + Affine::variable(static_cast<int>(j), Rational(-1, 5));
    bank.push_back(Expr::exp(a));
    Affine s = Affine::variable(static_cast<int>(i), 1);
    if (j != i) s = s + Affine::variable(static_cast<int>(j), Rational(1, 2));
    bank.push_back(Expr::sin(s));
  }
  return bank;
}

double left_invariance_residual(const VectorField& x, const GroupLaw& g, const SampleSpec& samples) {
  if (x.dim() != g.dim) throw DimensionError("field and group dimensions differ");
  const std::size_t n = g.dim;
  std::vector<CompiledExpr> coeffs;
  for (const auto& c : x.coeffs) coeffs.emplace_back(c);
  std::vector<std::vector<CompiledExpr>> grads;
  for (const auto& u : invariance_bank(n)) {
    std::vector<CompiledExpr> gu;
    for (std::size_t i = 0; i < n; ++i) gu.emplace_back(differentiate(u, static_cast<int>(i)));
    grads.push_back(std::move(gu));
  }
  SampleSpec s = samples;
  s.lo = -1;
  s.hi = 1;
  double worst = 0;
  for (const auto& p : sample_points(2 * n, s)) {
    std::span<const double> gp(p.data(), n), xp(p.data() + n, n);
    auto gx = multiply(g, gp, xp);
    Eigen::MatrixXd jt = translation_jacobian(g, Side::Left, gp, xp);
    Eigen::VectorXd cx(n), cgx(n);
    for (std::size_t i = 0; i < n; ++i) {
      cx(i) = coeffs[i](xp);
      cgx(i) = coeffs[i](gx);
    }
    Eigen::VectorXd pushed = jt * cx;
    for (const auto& gu : grads) {
      double lhs = 0, rhs = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = gu[i](gx);
        lhs += d * pushed(i);
        rhs += d * cgx(i);
      }
      worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::abs(rhs)));
    }
  }
  return worst;
}

namespace {

struct Candidate {
  VectorField field;
  std::vector<double> fingerprint;
};

std::vector<double> fingerprint(const VectorField& f, const std::vector<std::vector<double>>& pts) {
  std::vector<double> out;
  for (const auto& c : f.coeffs) {
    CompiledExpr ce(c);
    for (const auto& p : pts) out.push_back(ce(p));
  }
  return out;
}

bool same_fingerprint(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * (1 + std::abs(a[i]))) return false;
  return true;
}

bool zero_fingerprint(const std::vector<double>& a) {
  for (double v : a)
    if (std::abs(v) > 1e-13) return false;
  return true;
}

struct RankResult {
  std::size_t rank;
  bool exact;
};

RankResult rank_at(const std::vector<const VectorField*>& fields, const std::vector<Rational>& point) {
  const std::size_t n = point.size();
  if (fields.empty()) return {0, true};
  RationalMatrix exact(fields.size(), n);
  bool all_exact = true;
  for (std::size_t r = 0; r < fields.size() && all_exact; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      auto v = evaluate_exact(fields[r]->coeffs[c], point);
      if (!v) {
        all_exact = false;
        break;
      }
      exact(r, c) = *v;
    }
  if (all_exact) return {exact_rank(exact), true};
  std::vector<double> p;
  for (const auto& v : point) p.push_back(to_double(v));
  Eigen::MatrixXd m(fields.size(), n);
  for (std::size_t r = 0; r < fields.size(); ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = evaluate(fields[r]->coeffs[c], p);
  return {numeric_rank(m, 1e-9), false};
}

}  // namespace

BracketCertificate hormander_rank(const std::vector<VectorField>& fields, const std::vector<Rational>& point,
                                  std::optional<std::size_t> max_depth) {
  if (fields.empty()) throw DomainError("no fields given");
  const std::size_t n = fields.front().dim();
  if (point.size() != n) throw DimensionError("point dimension differs from the fields'");
  for (const auto& f : fields)
    if (f.dim() != n) throw DimensionError("fields of different dimension");
  const std::size_t depth_limit = max_depth.value_or(n + 2);

  SampleSpec fp_spec;
  fp_spec.count = 8;
  fp_spec.lo = -1;
  fp_spec.hi = 1;
  const auto fp_points = sample_points(n, fp_spec);

  std::vector<Candidate> all;
  auto admit = [&](VectorField f) -> bool {
    auto fp = fingerprint(f, fp_points);
    if (zero_fingerprint(fp) && f.is_zero()) return false;
    for (const auto& c : all) {
      if (!same_fingerprint(c.fingerprint, fp)) continue;
      bool same = true;
      for (std::size_t i = 0; i < n && same; ++i) same = equal_on_samples(c.field.coeffs[i], f.coeffs[i], n);
      if (same) return false;
    }
    all.push_back({std::move(f), std::move(fp)});
    return true;
  };

  BracketCertificate cert;
  cert.dim = n;
  std::vector<std::size_t> level;
  for (const auto& f : fields)
    if (admit(f)) level.push_back(all.size() - 1);
  const std::size_t generators = all.size();

  auto evaluate_rank = [&](std::size_t depth) {
    std::vector<const VectorField*> ptrs;
    for (const auto& c : all) ptrs.push_back(&c.field);
    auto r = rank_at(ptrs, point);
    cert.achieved_rank = r.rank;
    cert.rank_method = r.exact ? "exact" : "svd";
    cert.depth = depth;
    cert.full_rank = r.rank == n;
  };

  evaluate_rank(0);
  for (std::size_t depth = 1; depth <= depth_limit && !cert.full_rank; ++depth) {
    std::vector<std::size_t> next;
    for (std::size_t li : level)
      for (std::size_t gi = 0; gi < generators; ++gi) {
        VectorField b = lie_bracket(all[gi].field, all[li].field);
        if (admit(std::move(b))) next.push_back(all.size() - 1);
      }
    if (next.empty()) break;
    level = std::move(next);
    evaluate_rank(depth);
  }
  cert.fields_examined = all.size();

  // Greedy witness selection in discovery order.
  std::vector<const VectorField*> chosen;
  std::size_t rank = 0;
  for (const auto& c : all) {
    chosen.push_back(&c.field);
    auto r = rank_at(chosen, point);
    if (r.rank > rank) {
      rank = r.rank;
      cert.witnesses.push_back(c.field.label);
    } else {
      chosen.pop_back();
    }
    if (rank == cert.achieved_rank) break;
  }
  return cert;
}

}  // namespace lieop
