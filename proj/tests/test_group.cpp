#include "doctest.h"

#include "lieop/group.hpp"
#include "lieop/linalg.hpp"

#include <cmath>

using namespace lieop;

namespace {

const std::vector<RationalMatrix>& b_suite() {
  static const std::vector<RationalMatrix> s = {
      RationalMatrix{{0, 0}, {1, 0}},   // nilpotent
      RationalMatrix{{1, 1}, {-1, 0}},  // trace one, complex spectrum
      RationalMatrix{{1, 0}, {0, -1}},  // trace zero, real spectrum
      RationalMatrix{{0, 1}, {-1, 0}},  // rotation
      RationalMatrix{{2, 1}, {0, -1}},  // trace one, real spectrum
      RationalMatrix{{Rational(1, 2), 2}, {0, Rational(1, 3)}},
      RationalMatrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}},
  };
  return s;
}

}  // namespace

TEST_CASE("abelian law") {
  auto g = make_abelian(3);
  CHECK(g.dim == 3);
  std::vector<double> x{1, 2, 3}, y{-1, 0.5, 4};
  auto xy = multiply(g, x, y);
  CHECK(xy == std::vector<double>{0, 2.5, 7});
  auto j = translation_jacobian(g, Side::Right, y, x);
  CHECK(j.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(check_group(g).ok());
}

TEST_CASE("polarized Heisenberg law") {
  auto g = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  VarSet vv = g.vars.doubled();
  CHECK(equal_on_samples(g.product[0], parse("t + t_r", vv), 6));
  CHECK(equal_on_samples(g.product[1], parse("x1 + x1_r", vv), 6));
  CHECK(equal_on_samples(g.product[2], parse("x2 + x2_r + x1*t_r", vv), 6));
  CHECK(check_group(g).ok());
}

TEST_CASE("matrix exponential law and its translations") {
  RationalMatrix b{{1, 1}, {-1, 0}};
  auto g = make_matrix_exponential(b);
  CHECK(g.numeric_coefficients);
  auto c = check_group(g);
  CHECK(c.ok());
  SplitMix64 rng(3);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> p(3), q(3);
    for (auto& v : p) v = rng.uniform(-1, 1);
    for (auto& v : q) v = rng.uniform(-1, 1);
    // product display: (t + t', x + exp(tB) x')
    Eigen::MatrixXd e = expm(p[0] * to_eigen(b));
    auto pq = multiply(g, p, q);
    CHECK(pq[0] == doctest::Approx(p[0] + q[0]));
    CHECK(pq[1] == doctest::Approx(p[1] + e(0, 0) * q[1] + e(0, 1) * q[2]));
    CHECK(pq[2] == doctest::Approx(p[2] + e(1, 0) * q[1] + e(1, 1) * q[2]));
    // right translation by q at the identity: [[1, 0], [B x', I]]
    std::vector<double> id(3, 0.0);
    auto jr = translation_jacobian(g, Side::Right, q, id);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(3, 3);
    Eigen::Vector2d bx = to_eigen(b) * Eigen::Vector2d(q[1], q[2]);
    expect(1, 0) = bx(0);
    expect(2, 0) = bx(1);
    CHECK(scaled_difference(jr, expect, 1e-12, 1e-10) <= 1);
    CHECK(jr.determinant() == doctest::Approx(1.0));
    // left translation by p at the identity: diag(1, exp(tB))
    auto jl = translation_jacobian(g, Side::Left, p, id);
    Eigen::MatrixXd expect_l = Eigen::MatrixXd::Identity(3, 3);
    expect_l.block(1, 1, 2, 2) = e;
    CHECK(scaled_difference(jl, expect_l, 1e-12, 1e-10) <= 1);
  }
}

TEST_CASE("closed-form densities") {
  for (const auto& b : b_suite()) {
    CAPTURE(to_string(b));
    auto g = make_matrix_exponential(b);
    auto gh = make_inverse_matrix_exponential(b);
    CHECK(equal_on_samples(right_invariant_density(g).w, Expr(1), g.dim));
    Expr expect = Expr::exp(Affine::variable(0, -b.trace()));
    CHECK(equal_on_samples(right_invariant_density(gh).w, expect, gh.dim));
  }
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  CHECK(to_string(right_invariant_density(gh).w, gh.vars) == "exp(-1*t)");
}

TEST_CASE("right invariance of the density") {
  std::vector<GroupLaw> groups = {make_abelian(1), make_abelian(2), make_abelian(3)};
  for (const auto& b : b_suite()) {
    groups.push_back(make_matrix_exponential(b));
    groups.push_back(make_inverse_matrix_exponential(b));
  }
  groups.push_back(make_product_with_time(make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}})));
  for (const auto& g : groups) {
    CAPTURE(to_string(g.family));
    auto w = right_invariant_density(g);
    CHECK(right_invariance_residual(g, w) <= 1e-7);
  }
}

TEST_CASE("unimodularity iff trace zero") {
  for (const auto& b : b_suite()) {
    CAPTURE(to_string(b));
    CHECK(is_unimodular(make_matrix_exponential(b)) == (b.trace() == 0));
    CHECK(is_unimodular(make_inverse_matrix_exponential(b)) == (b.trace() == 0));
  }
  CHECK(is_unimodular(make_abelian(2)));
}

TEST_CASE("haar_mass_partial") {
  CHECK(haar_mass_partial(make_abelian(2), 1.0) == doctest::Approx(4.0).epsilon(1e-13));
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  for (double r : {1.0, 2.0}) {
    // 4R^2 * int_{-R}^{R} e^{-t} dt
    double closed = 4 * r * r * (std::exp(r) - std::exp(-r));
    CHECK(haar_mass_partial(gh, r) == doctest::Approx(closed).epsilon(1e-10));
  }
  CHECK(haar_mass_partial(gh, 2.0) > haar_mass_partial(gh, 1.0));
}

TEST_CASE("product with time keeps the inner density") {
  auto inner = make_inverse_matrix_exponential(RationalMatrix{{2, 1}, {0, -1}});
  auto g = make_product_with_time(inner);
  CHECK(g.dim == 4);
  CHECK(check_group(g).ok());
  auto w_inner = right_invariant_density(inner).w;
  auto w = right_invariant_density(g).w;
  CHECK(equal_on_samples(w, w_inner, 4));
}

TEST_CASE("custom law without inverse uses Newton") {
  VarSet v({"x", "y"});
  VarSet vv = v.doubled();
  std::vector<Expr> prod = {parse("x + x_r", vv), parse("y + y_r + x*x_r^2", vv)};
  // not associative in general; only exercise the inverse solve on a valid law
  auto g = make_custom(v, {parse("x + x_r", vv), parse("y + y_r + exp(x)*0", vv)}, {0, 0});
  std::vector<double> x{0.3, -1.2};
  auto xi = invert(g, x);
  auto e = multiply(g, x, xi);
  CHECK(std::abs(e[0]) < 1e-12);
  CHECK(std::abs(e[1]) < 1e-12);
  auto bad = make_custom(v, prod, {0, 0});
  CHECK_FALSE(check_group(bad).ok());
}

TEST_CASE("make_group argument checks") {
  CHECK_THROWS_AS(make_group(GroupFamily::MatrixExponential, std::nullopt, nullptr), DomainError);
  CHECK_THROWS_AS(make_matrix_exponential(RationalMatrix(2, 3)), DimensionError);
  auto inner = make_abelian(2);
  CHECK_THROWS_AS(make_group(GroupFamily::Abelian, std::nullopt, &inner, 2), DomainError);
  CHECK(make_group(GroupFamily::ProductWithTime, std::nullopt, &inner).dim == 3);
}
