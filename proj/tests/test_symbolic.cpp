#include "doctest.h"

#include "lieop/symbolic.hpp"

#include <cmath>

using namespace lieop;

namespace {

const VarSet kXT({"x1", "x2", "t"}, 2);

Expr P(const std::string& s) { return parse(s, kXT); }

double at(const Expr& e, double x1, double x2, double t) { return evaluate(e, std::vector<double>{x1, x2, t}); }

// Central difference, step h, for variable v.
double central(const Expr& e, std::vector<double> p, int v, double h = 1e-5) {
  auto q = p;
  p[v] += h;
  q[v] -= h;
  return (evaluate(e, p) - evaluate(e, q)) / (2 * h);
}

}  // namespace

TEST_CASE("parse: two summands") {
  Expr e = P("x1^2 + exp(2*t)");
  REQUIRE(e.kind() == ExprKind::Sum);
  CHECK(e.args().size() == 2);
  CHECK(at(e, 3, 0, 0) == doctest::Approx(10.0));
}

TEST_CASE("parse: errors") {
  CHECK_THROWS_AS(P("exp(x1*x2)"), ParseError);
  CHECK_THROWS_AS(P("x1 + y"), ParseError);
  CHECK_THROWS_AS(P("x1^-1"), ParseError);
  CHECK_THROWS_AS(P("x1^(1/2)"), ParseError);
  CHECK_THROWS_AS(P("x1 / x2"), ParseError);
  CHECK_THROWS_AS(P("(x1 + 1"), ParseError);
  CHECK_THROWS_AS(P("x1 +"), ParseError);
  try {
    P("x1 + $");
    FAIL("expected throw");
  } catch (const ParseError& err) {
    CHECK(err.position() == 5);
  }
}

TEST_CASE("parse: exponential counterexample form") {
  Expr e = P("exp(x1+x2+2*t)");
  CHECK(e.kind() == ExprKind::Exp);
  CHECK(at(e, 0.5, -0.25, 0.1) == doctest::Approx(std::exp(0.45)));
  CHECK(to_string(e, kXT) == "exp(1*x1 + 1*x2 + 2*t)");
}

TEST_CASE("literals are exact") {
  Expr e = P("0.1 + 1/3 + 2.5e-1");
  REQUIRE(e.is_constant());
  CHECK(e.constant_value() == Rational(41, 60));
  CHECK(P("6/4").constant_value() == Rational(3, 2));
}

TEST_CASE("evaluate") {
  CHECK(at(P("exp(t)"), 0, 0, 0) == 1.0);
  CHECK(at(P("x1^2 + x2^2"), 3, 4, 0) == 25.0);
  CHECK(at(P("sin(x1)*cos(x2) - 2"), 0.3, 0.7, 0) == doctest::Approx(std::sin(0.3) * std::cos(0.7) - 2));
}

TEST_CASE("simplification basics") {
  CHECK(P("x1 - x1").is_zero());
  CHECK(P("0*exp(t) + 1*1").is_one());
  CHECK(identical(P("x1 + x1"), P("2*x1")));
  CHECK(identical(P("x1*x1*x1"), P("x1^3")));
  CHECK(identical(P("exp(t)*exp(-t)"), Expr(1)));
  CHECK(identical(P("exp(x1)^2"), P("exp(2*x1)")));
  CHECK(P("sin(0*x1)").is_zero());
  CHECK(P("cos(x1 - x1)").is_one());
}

TEST_CASE("differentiate") {
  CHECK(identical(differentiate(P("x1^2"), 0), P("2*x1")));
  Expr e = P("exp(3*t)");
  CHECK(identical(differentiate(e, 2), P("3*exp(3*t)")));
  Expr te = P("t*exp(t)");
  Expr d = differentiate(te, 2);
  CHECK(equal_on_samples(d, P("exp(t) + t*exp(t)"), 3));
  for (double t : {0.0, 1.0}) CHECK(at(d, 0, 0, t) == doctest::Approx(central(te, {0, 0, t}, 2)).epsilon(1e-8));
}

TEST_CASE("equal_on_samples") {
  CHECK(equal_on_samples(P("sin(x1)^2 + cos(x1)^2"), Expr(1), 3));
  CHECK_FALSE(equal_on_samples(P("x1"), P("x1 + 0.001"), 3));
}

TEST_CASE("ring properties on samples") {
  const std::vector<std::string> bank = {"x1^3*exp(x2 - t)", "sin(2*x1 + t)*x2^2", "(x1 + x2)^4 - 3*cos(t)",
                                         "exp(x1)*sin(x2)*cos(t/2)", "x1*x2*t + 1/7"};
  for (const auto& a : bank)
    for (const auto& b : bank) {
      Expr ea = P(a), eb = P(b);
      for (int v = 0; v < 3; ++v) {
        // linearity
        CHECK(equal_on_samples(differentiate(Expr(3) * ea - Expr(Rational(1, 2)) * eb, v),
                               Expr(3) * differentiate(ea, v) - Expr(Rational(1, 2)) * differentiate(eb, v), 3));
        // product rule
        CHECK(equal_on_samples(differentiate(ea * eb, v), differentiate(ea, v) * eb + ea * differentiate(eb, v), 3));
        // Clairaut
        for (int w = 0; w < 3; ++w)
          CHECK(equal_on_samples(differentiate(differentiate(ea, v), w), differentiate(differentiate(ea, w), v), 3));
      }
    }
}

TEST_CASE("print then parse round-trips") {
  const std::vector<std::string> bank = {"x1^3*exp(x2 - t)",   "-sin(2*x1 + t)*x2^2 + 1/3", "(x1 + x2)^4 - 3*cos(t)",
                                         "exp(-x1)*(x2 - 1)^2", "-(x1*x2*t) - 5/7",          "2*(x1 - 3)*exp(0.5*t)",
                                         "x1 - (x2 - t)^3",     "-1/2*x1"};
  for (const auto& s : bank) {
    Expr e = P(s);
    std::string printed = to_string(e, kXT);
    CAPTURE(printed);
    Expr back = P(printed);
    CHECK(equal_on_samples(e, back, 3));
    CHECK(identical(e, back));
  }
}

TEST_CASE("substitute") {
  std::vector<Expr> rep = {P("x1 + t"), P("x2*x1"), P("t")};
  Expr e = P("x1^2 + exp(3*t)");
  CHECK(equal_on_samples(substitute(e, rep), P("(x1 + t)^2 + exp(3*t)"), 3));
  CHECK_THROWS_AS(substitute(P("exp(x2)"), rep), NonAffineError);
}

TEST_CASE("as_affine") {
  auto a = as_affine(P("2*x1 - t/3 + 5"));
  REQUIRE(a);
  CHECK(a->constant == 5);
  CHECK(a->coefficient(0) == 2);
  CHECK(a->coefficient(2) == Rational(-1, 3));
  CHECK_FALSE(as_affine(P("x1*x2")));
}

TEST_CASE("evaluate_exact") {
  std::vector<Rational> p = {Rational(1, 2), 3, 0};
  auto v = evaluate_exact(P("x1^2*x2 + exp(t) + sin(2*t)"), p);
  REQUIRE(v);
  CHECK(*v == Rational(7, 4));
  CHECK_FALSE(evaluate_exact(P("exp(x1)"), p));
}

TEST_CASE("compiled matches tree evaluation") {
  Expr e = P("(x1 + x2)^4*exp(-t) - 3*cos(t)*sin(x1) + 1/7");
  CompiledExpr c(e);
  for (const auto& p : sample_points(3, {})) {
    CHECK(c(p) == doctest::Approx(evaluate(e, p)).epsilon(1e-14));
    std::vector<long double> q(p.begin(), p.end());
    CHECK(static_cast<double>(c.eval_ld(q)) == doctest::Approx(evaluate(e, p)).epsilon(1e-14));
  }
}
