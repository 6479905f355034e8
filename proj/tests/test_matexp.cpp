#include "doctest.h"

#include "lieop/linalg.hpp"
#include "lieop/matexp.hpp"
#include "lieop/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace lieop;

namespace {

// Truncated Taylor series in long double; an oracle independent of the Pade code.
Eigen::MatrixXd taylor_exp(const Eigen::MatrixXd& a) {
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  M al = a.cast<long double>();
  int halvings = 0;
  while (al.cwiseAbs().maxCoeff() > 0.5) {
    al /= 2;
    ++halvings;
  }
  M sum = M::Identity(a.rows(), a.cols()), term = sum;
  for (int k = 1; k < 40; ++k) {
    term = term * al / static_cast<long double>(k);
    sum += term;
  }
  for (int k = 0; k < halvings; ++k) sum = sum * sum;
  return sum.cast<double>();
}

double max_rel_diff(const SymbolicExponential& e, const RationalMatrix& b, double t) {
  std::vector<double> p = {t};
  Eigen::MatrixXd sym = evaluate(e.entries, p);
  Eigen::MatrixXd num = expm(t * to_eigen(b));
  return scaled_difference(sym, num, 1e-12, 1e-10);
}

}  // namespace

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  for (std::size_t n : {1, 2, 5, 16, 32, 64}) {
    const auto& r = gauss_legendre(n);
    double wsum = 0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (std::size_t deg = 0; deg < 2 * n; deg += 2) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], static_cast<double>(deg));
      CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
    }
  }
  std::vector<double> lo{0, 0}, hi{1, 2};
  CHECK(integrate_box([](std::span<const double> x) { return x[0] * x[1] * x[1]; }, lo, hi, 4, 3) ==
        doctest::Approx(0.5 * 8.0 / 3.0));
  CHECK(integrate_composite([](double x) { return std::exp(x); }, 0, 1, 4, 8) == doctest::Approx(std::exp(1.0) - 1));
}

TEST_CASE("pade expm agrees with a long-double Taylor oracle") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-3, 3);
    CHECK(scaled_difference(expm(a), taylor_exp(a), 1e-12, 1e-11) <= 1.0);
  }
}

TEST_CASE("characteristic polynomial") {
  RationalMatrix b{{1, 1}, {-1, 0}};
  auto p = characteristic_polynomial(b);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 1);
  CHECK(p[1] == -1);
  CHECK(p[2] == 1);
  auto sq = squarefree_decomposition(Polynomial{0, 0, 0, 1});  // x^3
  REQUIRE(sq.size() == 1);
  CHECK(sq[0].second == 3);
}

TEST_CASE("nilpotent exponential is the truncated series") {
  RationalMatrix b{{0, 0}, {1, 0}};
  auto e = symbolic_exp(b, 0);
  CHECK_FALSE(e.numeric_coefficients);
  VarSet t({"t"});
  CHECK(to_string(e.entries[1][0], t) == "t");
  CHECK(e.entries[0][0].is_one());
  CHECK(e.entries[0][1].is_zero());
  std::vector<double> p = {2.0};
  CHECK(evaluate(e.entries[1][0], p) == 2.0);
  CHECK(evaluate(e.entries[1][0], p) == doctest::Approx(expm(2.0 * to_eigen(b))(1, 0)));
}

TEST_CASE("symbolic exp(tB) matches the numeric exponential") {
  const std::vector<std::pair<RationalMatrix, bool>> suite = {
      {RationalMatrix{{0, 0}, {1, 0}}, false},
      {RationalMatrix{{1, 1}, {-1, 0}}, true},  // complex pair with irrational imaginary part
      {RationalMatrix{{1, 0}, {0, -1}}, false},
      {RationalMatrix{{0, 1}, {-1, 0}}, false},
      {RationalMatrix{{2, 1}, {0, -1}}, false},
      {RationalMatrix{{1, 2}, {0, 1}}, false},
      {RationalMatrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, false},
      {RationalMatrix{{0, 1, 0}, {0, 0, 1}, {1, -3, 3}}, false},  // (l-1)^3
      {RationalMatrix{{1, 2}, {3, 4}}, true},
      {RationalMatrix{{0, -1, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, -1}, {0, 1, 1, 0}}, false},  // repeated +-i
      {RationalMatrix{{Rational(1, 2), 0, 1}, {0, -2, 0}, {0, 1, Rational(1, 3)}}, false},
      {RationalMatrix{{0, 1, 0}, {0, 0, 1}, {2, 0, 0}}, true},
  };
  for (const auto& [b, numeric] : suite) {
    CAPTURE(to_string(b));
    auto e = symbolic_exp(b, 0);
    CHECK(e.numeric_coefficients == numeric);
    for (double t : {-1.5, -0.3, 0.0, 0.7, 2.0}) CHECK(max_rel_diff(e, b, t) <= 1.0);
  }
}

TEST_CASE("det exp(tB) = exp(t trace B) on samples") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    RationalMatrix b(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) = Rational(static_cast<long long>(rng.next() % 9) - 4, 1 + rng.next() % 3);
    CAPTURE(to_string(b));
    auto e = symbolic_exp(b, 0);
    Expr det = determinant(e.entries);
    Expr closed = Expr::exp(Affine::variable(0, b.trace()));
    CHECK(equal_on_samples(det, closed, 1));
  }
}
