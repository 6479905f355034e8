#include "doctest.h"

#include "lieop/kolmogorov.hpp"
#include "lieop/linalg.hpp"
#include "lieop/quadrature.hpp"

#include <cmath>

using namespace lieop;

namespace {

KolmogorovSpec block_n1() { return make_kolmogorov(RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{0, 0}, {1, 0}}); }

KolmogorovSpec chain3() {
  return make_kolmogorov(RationalMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}},
                         RationalMatrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
}

// (A, B, expected verdict), verdicts by hand from the Kalman condition
struct Case {
  RationalMatrix a, b;
  bool pass;
};

std::vector<Case> suite() {
  return {
      {RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{0, 0}, {1, 0}}, true},
      {RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{0, 0}, {0, 0}}, false},
      {RationalMatrix{{0, 0}, {0, 0}}, RationalMatrix{{0, 0}, {1, 0}}, false},
      {RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix{{0, 0}, {0, 0}}, true},
      {RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{1, 1}, {-1, 0}}, true},
      {RationalMatrix{{0, 0}, {0, 1}}, RationalMatrix{{0, 1}, {0, 0}}, true},
      {RationalMatrix{{0, 0}, {0, 1}}, RationalMatrix{{0, 0}, {1, 0}}, false},
      {RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{2, 0}, {0, -1}}, false},
      {RationalMatrix{{1, 1}, {1, 1}}, RationalMatrix{{0, 0}, {1, 0}}, true},
      {RationalMatrix{{1, 1}, {1, 1}}, RationalMatrix{{1, 0}, {0, 1}}, false},
      {RationalMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, RationalMatrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, true},
      {RationalMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, RationalMatrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}, false},
      {RationalMatrix{{0, 0, 0}, {0, 0, 0}, {0, 0, 1}}, RationalMatrix{{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}, true},
  };
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(make_kolmogorov(RationalMatrix{{1, 1}, {0, 1}}, RationalMatrix(2, 2)), DomainError);
  CHECK_THROWS_AS(make_kolmogorov(RationalMatrix{{-1, 0}, {0, 1}}, RationalMatrix(2, 2)), DomainError);
  CHECK_THROWS_AS(make_kolmogorov(RationalMatrix{{1}}, RationalMatrix(2, 2)), DimensionError);
}

TEST_CASE("operator of a Kolmogorov spec") {
  auto l = operator_of(block_n1());
  CHECK(l.vars().names() == std::vector<std::string>{"x1", "x2", "t"});
  CHECK(identical(apply(l, parse("t", l.vars())), Expr(-1)));
  CHECK(identical(apply(l, parse("x2", l.vars())), parse("x1", l.vars())));
}

TEST_CASE("covariance against polynomial oracles") {
  auto k = block_n1();
  CHECK(covariance(make_kolmogorov(RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix(2, 2)), 2.5)
            .isApprox(2.5 * Eigen::MatrixXd::Identity(2, 2), 1e-14));
  for (double t : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
    Eigen::MatrixXd expect(2, 2);
    expect << t, -t * t / 2, -t * t / 2, t * t * t / 3;
    Eigen::MatrixXd c = covariance(k, t);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(expect(i, j)).epsilon(1e-8));
    // E(s) e1 = (1, -s, s^2/2)
    Eigen::MatrixXd e3(3, 3);
    e3 << t, -t * t / 2, std::pow(t, 3) / 6, -t * t / 2, std::pow(t, 3) / 3, -std::pow(t, 4) / 8, std::pow(t, 3) / 6,
        -std::pow(t, 4) / 8, std::pow(t, 5) / 20;
    Eigen::MatrixXd c3 = covariance(chain3(), t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(c3(i, j) == doctest::Approx(e3(i, j)).epsilon(1e-8));
  }
  // monotone in t
  auto mix = make_kolmogorov(RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{1, 1}, {-1, 0}});
  CHECK(min_eigenvalue_symmetric(covariance(mix, 2.0) - covariance(mix, 1.0)) >= -1e-10);
  CHECK_THROWS_AS(covariance(k, 0.0), DomainError);
}

TEST_CASE("quadrature and Kalman criteria agree") {
  std::size_t n_cases = 0;
  for (const auto& c : suite()) {
    CAPTURE(to_string(c.a));
    CAPTURE(to_string(c.b));
    auto r = hypoellipticity_check(make_kolmogorov(c.a, c.b));
    CHECK(r.verdict == (c.pass ? "pass" : "fail"));
    CHECK((r.kalman_rank == c.a.rows()) == c.pass);
    CHECK(r.min_eigenvalues.size() == 5);
    ++n_cases;
  }
  CHECK(n_cases >= 10);
  auto zero = hypoellipticity_check(make_kolmogorov(RationalMatrix(2, 2), RationalMatrix{{0, 0}, {1, 0}}));
  CHECK(zero.kalman_rank == 0);
}

TEST_CASE("weight and group law") {
  for (const auto& c : suite()) {
    auto k = make_kolmogorov(c.a, c.b);
    auto g = group_law(k);
    CAPTURE(to_string(c.b));
    CHECK(check_group(g).ok());
    auto w = weight(k);
    auto d = right_invariant_density(g);
    // equal up to one constant: ratio is constant on samples
    CHECK(equal_on_samples(w.w, d.w, g.dim));
    CHECK(right_invariance_residual(g, w) <= 1e-7);
    CHECK(check_left_invariance(operator_of(k), g) <= 1e-6);
  }
  auto tr1 = make_kolmogorov(RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{1, 1}, {-1, 0}});
  CHECK(to_string(weight(tr1).w, operator_of(tr1).vars()) == "exp(1*t)");
  CHECK(weight(block_n1()).w.is_one());
  // B = 0: the law is abelian
  auto flat = group_law(make_kolmogorov(RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix(2, 2)));
  std::vector<double> x{0.3, -0.2, 1.1}, y{-0.7, 0.4, 0.5};
  CHECK(multiply(flat, x, y) == multiply(flat, y, x));
  // nilpotent B: polynomial law (x1' + x1, x2' + x2 - t' x1, t + t')
  auto g = group_law(block_n1());
  VarSet vv = g.vars.doubled();
  CHECK(equal_on_samples(g.product[1], parse("x2_r + x2 - t_r*x1", vv), 6));
}

TEST_CASE("gaussian kernel") {
  auto heat = make_kolmogorov(RationalMatrix{{1}}, RationalMatrix{{0}});
  std::vector<double> zero{0.0};
  CHECK(gaussian_kernel(heat, 1.0, zero) == doctest::Approx(0.28209479177387814).epsilon(1e-12));
  std::vector<double> x{0.7};
  CHECK(gaussian_kernel(heat, 0.3, x) ==
        doctest::Approx(std::exp(-0.49 / 1.2) / std::sqrt(4 * M_PI * 0.3)).epsilon(1e-12));
  auto k = block_n1();
  CHECK(kernel_mass(k, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(kernel_mass(heat, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
  std::vector<std::vector<double>> grid;
  for (double t : {0.25, 1.0, 2.0})
    for (double a : {-1.0, 0.0, 0.5})
      for (double b : {-0.5, 0.3}) grid.push_back({a, b, t});
  CHECK(kernel_annihilation_residual(k, grid) <= 1e-4);
  // with trace B != 0 the x-mass is e^{-t trace B}
  auto tr1 = make_kolmogorov(RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix{{1, 1}, {-1, 0}});
  CHECK(kernel_mass(tr1, 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  CHECK(kernel_annihilation_residual(tr1, grid) <= 1e-4);
  auto singular = make_kolmogorov(RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix(2, 2));
  std::vector<double> p{0, 0};
  CHECK_THROWS_AS(gaussian_kernel(singular, 1.0, p), DomainError);
}

TEST_CASE("weak prolongation") {
  auto k = block_n1();
  auto l = operator_of(k);
  auto phi = polynomial_bump({Rational(1, 2), 0, 0}, {1, 1, Rational(1, 2)});
  CHECK(weak_prolongation_residual(k, Expr(0), phi) == 0);
  // negative control: u = t x1, Lu = -x1
  auto u = parse("t*x1", l.vars());
  double r = weak_prolongation_residual(k, u, phi);
  CompiledExpr lu(apply(l, u)), cphi(phi.core);
  std::vector<double> lo{-0.5, -1, 0}, hi{1.5, 1, 0.5};
  double direct = std::abs(integrate_box([&](std::span<const double> p) { return lu(p) * cphi(p); }, lo, hi, 16, 4));
  CHECK(r > 1e-3);
  CHECK(r == doctest::Approx(direct).epsilon(1e-9));
  CHECK_THROWS_AS(weak_prolongation_residual(k, parse("x1 + t", l.vars()), phi), DomainError);
  // positive control: a difference of kernels, with poles at x = 0 and x = -a kept off the support
  GaussianKernel gamma(k);
  auto g = group_law(k);
  auto diff = [&](std::span<const double> p) {
    if (p[2] <= 0) return 0.0;
    std::vector<double> shifted = multiply(g, std::vector<double>{1, 0, 0}, p);
    return gamma(p[2], p.subspan(0, 2)) - gamma(p[2], std::span<const double>(shifted.data(), 2));
  };
  auto far = polynomial_bump({2, 0, 0}, {Rational(3, 4), 1, Rational(1, 2)});
  double pos = weak_prolongation_residual(k, diff, far, 16, 4);
  CHECK(pos <= 1e-5);
  std::pair<std::vector<double>, std::vector<double>> small{{1.5, -1, -0.5}, {2.5, 1, 0.5}};
  CHECK_THROWS_AS(weak_prolongation_residual(k, diff, far, 16, 4, small), DomainError);
}
