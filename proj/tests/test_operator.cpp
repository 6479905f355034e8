#include "doctest.h"

#include "lieop/bump.hpp"
#include "lieop/operator.hpp"
#include "lieop/quadrature.hpp"

#include <cmath>

using namespace lieop;

namespace {

const VarSet kXT({"x1", "x2", "t"}, 2);

// d_x1^2 + x1 d_x2 - d_t
SecondOrderOperator kolmogorov_n1() {
  ExprMatrix a(3, std::vector<Expr>(3));
  a[0][0] = Expr(1);
  return SecondOrderOperator(kXT, a, {Expr(0), parse("x1", kXT), Expr(-1)});
}

// (sqrt(1+s^2) - 1)^p with derivatives from the product rule
ScalarFunction gadget(long double p) {
  auto g = [](long double s) { return std::sqrt(1 + s * s) - 1; };
  auto g1 = [](long double s) { return s / std::sqrt(1 + s * s); };
  auto g2 = [](long double s) { return 1 / ((1 + s * s) * std::sqrt(1 + s * s)); };
  return {"gadget",
          [=](long double s) { return std::pow(g(s), p); },
          [=](long double s) { return p * std::pow(g(s), p - 1) * g1(s); },
          [=](long double s) {
            return p * (p - 1) * std::pow(g(s), p - 2) * g1(s) * g1(s) + p * std::pow(g(s), p - 1) * g2(s);
          }};
}

double pairing(const std::function<double(std::span<const double>)>& f, const CompactFunction& u,
               const CompactFunction& v) {
  std::vector<double> lo(u.lo.size()), hi(u.lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::max(u.lo[i], v.lo[i]);
    hi[i] = std::min(u.hi[i], v.hi[i]);
  }
  return integrate_box(f, lo, hi, 16, 2);
}

}  // namespace

TEST_CASE("built-in operators") {
  auto h = heat_operator(3);
  CHECK(h.dim() == 4);
  auto u = parse("exp(x1 + x2 + x3 + 3*t)", h.vars());
  CHECK(apply(h, u).is_zero());
  auto lap = laplacian(2);
  CHECK(apply(lap, parse("x1^2 - x2^2", lap.vars())).is_zero());
  CHECK(identical(apply(lap, parse("x1^2 + x2^2", lap.vars())), Expr(4)));
}

TEST_CASE("constructor checks") {
  ExprMatrix bad{{Expr(-1), Expr(0)}, {Expr(0), Expr(1)}};
  CHECK_THROWS_AS(SecondOrderOperator(VarSet({"a", "b"}), bad, {Expr(0), Expr(0)}), DomainError);
  CHECK_NOTHROW(SecondOrderOperator(VarSet({"a", "b"}), bad, {Expr(0), Expr(0)}, false));
  ExprMatrix ok{{Expr(1), Expr(0)}, {Expr(0), Expr(0)}};
  CHECK_THROWS_AS(SecondOrderOperator(VarSet({"a", "b"}), ok, {Expr(0)}), DimensionError);
  CHECK_THROWS_AS(SecondOrderOperator(VarSet({"a", "b"}), ok, {Expr(0), Expr::variable(2)}), DimensionError);
  // upper triangle is mirrored
  ExprMatrix up{{Expr(1), Expr(2)}, {Expr(0), Expr(5)}};
  SecondOrderOperator l(VarSet({"a", "b"}), up, {Expr(0), Expr(0)});
  CHECK(identical(l.a(1, 0), Expr(2)));
}

TEST_CASE("kolmogorov operator and its decomposition") {
  auto k = kolmogorov_n1();
  CHECK(identical(apply(k, parse("t", kXT)), Expr(-1)));
  auto d = decompose(k);
  CHECK(d.drift.coeffs[0].is_zero());
  CHECK(identical(d.drift.coeffs[1], parse("x1", kXT)));
  CHECK(identical(d.drift.coeffs[2], Expr(-1)));
  // divergence form agrees with the operator
  ExprMatrix a{{parse("1 + x2^2", kXT), parse("x1", kXT), Expr(0)},
               {Expr(0), parse("1 + x1^2", kXT), Expr(0)},
               {Expr(0), Expr(0), Expr(0)}};
  SecondOrderOperator l(kXT, a, {parse("sin(x2)", kXT), Expr(1), Expr(-1)}, false);
  for (const char* s : {"x1^3*x2 + t", "exp(x1 - x2)", "cos(x1 + t)"}) {
    auto u = parse(s, kXT);
    CHECK(equal_on_samples(apply(d = decompose(l), u), apply(l, u), 3));
  }
}

TEST_CASE("from_frame") {
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  auto fr = left_invariant_frame(gh);
  auto l2 = from_frame({fr[1]}, Expr(-1) * fr[0], gh.vars);
  // d_x1^2 - d_t - x1 d_x2
  CHECK(identical(l2.a(1, 1), Expr(1)));
  CHECK(l2.a(0, 0).is_zero());
  CHECK(identical(l2.b()[0], Expr(-1)));
  CHECK(l2.b()[1].is_zero());
  CHECK(identical(l2.b()[2], parse("-x1", gh.vars)));

  auto gb = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  auto fb = left_invariant_frame(gb);
  auto lb = from_frame({fb[1]}, Expr(-1) * fb[0], gb.vars, {Rational(1, 2)});
  CHECK(identical(lb.a(1, 1), Expr(Rational(1, 2))));
  CHECK(identical(lb.b()[0], Expr(-1)));
  CHECK(equal_on_samples(lb.b()[1], parse("-x1 - x2", gb.vars), 3));
  CHECK(equal_on_samples(lb.b()[2], parse("x1", gb.vars), 3));

  CHECK_THROWS_AS(from_frame({fb[1]}, std::nullopt, gb.vars, {Rational(-1)}), DomainError);
  // a field with variable coefficients feeds its self-derivative into the drift
  VarSet v({"y"});
  VectorField f{{parse("y", v)}, "Y"};
  auto ly = from_frame({f}, std::nullopt, v);
  auto u = parse("y^3", v);
  CHECK(equal_on_samples(apply(ly, u), apply_field(f, apply_field(f, u)), 1));
}

TEST_CASE("psi_a") {
  auto h = heat_operator(2);
  auto u = parse("x1 + x2 + t", h.vars());
  CHECK(identical(psi_a(h, u), Expr(2)));
  auto w = parse("exp(x1 + x2 + 2*t)", h.vars());
  CHECK(equal_on_samples(psi_a(h, w), Expr(2) * w * w, 3));
}

TEST_CASE("chain rule") {
  auto h = heat_operator(1);
  VarSet s({"s"});
  auto u = parse("x1^2 + exp(x1 - t)", h.vars());
  auto sq = chain_rule_residual(h, u, parse("s^2", s));
  CHECK(sq.method == "symbolic composition");
  CHECK(sq.residual <= 1e-9);
  auto numeric = chain_rule_residual(h, u, scalar_function(parse("s^2", s), "square"));
  CHECK(numeric.residual <= 1e-6);
  CHECK(numeric.points == 64);
  // non-affine exp argument after substitution takes the numeric path
  auto e = chain_rule_residual(h, u, parse("exp(s)", s));
  CHECK(e.method.find("finite differences") == 0);
  CHECK(e.residual <= 1e-6);
  auto k = kolmogorov_n1();
  CHECK(chain_rule_residual(k, parse("x1*x2 - t^2", kXT), gadget(1.5)).residual <= 1e-6);
  CHECK(chain_rule_residual(laplacian(2), parse("x1^2 - x2^2", laplacian(2).vars()), gadget(3)).residual <= 1e-6);
}

TEST_CASE("nondegeneracy") {
  auto r = check_nd(kolmogorov_n1(), {{0, 0, 0}, {1, 2, 3}});
  CHECK(r.nondegenerate);
  CHECK(r.per_point.size() == 2);
  ExprMatrix z(1, std::vector<Expr>(1));
  SecondOrderOperator first_order(VarSet({"a"}), z, {Expr(1)});
  CHECK_FALSE(check_nd(first_order, {{0}}).nondegenerate);
  CHECK_THROWS_AS(check_nd(first_order, {}), DomainError);
}

TEST_CASE("left invariance") {
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  auto fr = left_invariant_frame(gh);
  auto l2 = from_frame({fr[1]}, Expr(-1) * fr[0], gh.vars);
  CHECK(check_left_invariance(l2, gh) <= 1e-7);
  // heat operator written in the same coordinates (t, x1, x2)
  ExprMatrix a(3, std::vector<Expr>(3));
  a[1][1] = a[2][2] = Expr(1);
  SecondOrderOperator heat(gh.vars, a, {Expr(-1), Expr(0), Expr(0)});
  CHECK(check_left_invariance(heat, gh) > 1e-3);
  CHECK(check_left_invariance(heat_operator(2), make_abelian(3)) <= 1e-12);
  auto gb = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  auto fb = left_invariant_frame(gb);
  auto lb = from_frame({fb[1], fb[2]}, Expr(-1) * fb[0], gb.vars, {Rational(1, 2), Rational(3)});
  CHECK(check_left_invariance(lb, gb) <= 1e-7);
}

TEST_CASE("formal adjoint") {
  // drift <Bx, grad> maps to -<Bx, grad> - tr B
  VarSet v({"x1", "x2"});
  ExprMatrix a{{Expr(1), Expr(0)}, {Expr(0), Expr(1)}};
  SecondOrderOperator l(v, a, {parse("x1 + x2", v), parse("-x1 + 2*x2", v)});
  auto adj = formal_adjoint(l);
  CHECK(identical(adj.c, Expr(-3)));
  CHECK(equal_on_samples(adj.b[0], parse("-x1 - x2", v), 2));
  // duality against bumps, with variable second-order coefficients
  ExprMatrix av{{parse("1 + x2^2", v), parse("x1/2", v)}, {Expr(0), parse("2 + x1^2", v)}};
  SecondOrderOperator lv(v, av, {parse("x1*x2", v), parse("sin(x1)", v)});
  auto adjv = formal_adjoint(lv);
  auto u = polynomial_bump({0, 0}, {1, 1});
  auto w = polynomial_bump({Rational(1, 5), Rational(-1, 10)}, {Rational(6, 5), 1});
  CompiledExpr lu(apply(lv, u.core)), lsw(apply(adjv, w.core)), cu(u.core), cw(w.core);
  double lhs = pairing([&](std::span<const double> x) { return cw(x) * lu(x); }, u, w);
  double rhs = pairing([&](std::span<const double> x) { return cu(x) * lsw(x); }, u, w);
  CHECK(std::abs(lhs) > 1e-3);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("classification") {
  auto h = heat_operator(1);
  auto c = classify(h, parse("x1^2 + 2*t", h.vars()));
  CHECK(c.kind == Harmonicity::Harmonic);
  CHECK(c.exact_zero);
  CHECK(classify(h, parse("x1^2", h.vars())).kind == Harmonicity::Subharmonic);
  CHECK(classify(h, parse("t", h.vars())).kind == Harmonicity::Superharmonic);
  CHECK(classify(h, parse("x1^3", h.vars())).kind == Harmonicity::None);
  CHECK(to_string(Harmonicity::Subharmonic) == "subharmonic");
}

TEST_CASE("constancy conditions") {
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  auto fr = left_invariant_frame(gh);
  auto l2 = from_frame({fr[1]}, Expr(-1) * fr[0], gh.vars);
  auto c1 = constancy_conditions(l2, Expr(5));
  CHECK(c1.constant);
  CHECK(c1.fields_vanish);
  CHECK(c1.psi_and_drift_vanish);
  CHECK(c1.harmonic_and_psi_vanish);
  auto c2 = constancy_conditions(l2, parse("x2", gh.vars));
  CHECK_FALSE(c2.constant);
  CHECK_FALSE(c2.fields_vanish);
  CHECK_FALSE(c2.psi_and_drift_vanish);
  CHECK_FALSE(c2.harmonic_and_psi_vanish);
  // L-harmonic but not constant: Psi_A(u) does not vanish
  auto c3 = constancy_conditions(l2, parse("x1", gh.vars));
  CHECK_FALSE(c3.constant);
  CHECK_FALSE(c3.harmonic_and_psi_vanish);
  CHECK(equal_on_samples(apply(l2, parse("x1", gh.vars)), Expr(0), 3));
}
