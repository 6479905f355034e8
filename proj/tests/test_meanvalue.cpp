#include "doctest.h"

#include "lieop/meanvalue.hpp"
#include "lieop/quadrature.hpp"

#include <chrono>
#include <cmath>

using namespace lieop;

namespace {

std::vector<std::vector<double>> probe_points(std::size_t n) { return sample_points(n, {6, -1, 1, 77}); }

}  // namespace

TEST_CASE("ball measures") {
  auto m1 = laplacian_ball_measures(1, 1.0);
  CHECK(m1.sphere_nodes == std::vector<std::vector<double>>{{-1.0}, {1.0}});
  CHECK(m1.sphere_weights == std::vector<double>{0.5, 0.5});
  CHECK(m1.nu_mass() == doctest::Approx(0.5).epsilon(1e-13));
  for (std::size_t n : {1, 2, 3})
    for (double r : {0.25, 1.0, 2.0}) {
      auto mp = laplacian_ball_measures(n, r);
      CHECK(std::abs(mp.mu_mass() - 1) <= 1e-8);
      // nu mass = int_B G = r^2 / (2n)
      CHECK(mp.nu_mass() == doctest::Approx(r * r / (2.0 * static_cast<double>(n))).epsilon(1e-9));
      for (double w : mp.sphere_weights) CHECK(w >= 0);
      for (double w : mp.volume_weights) CHECK(w >= 0);
      for (const auto& y : mp.sphere_nodes) {
        double s = 0;
        for (double v : y) s += v * v;
        CHECK(std::sqrt(s) == doctest::Approx(r).epsilon(1e-13));
      }
    }
  CHECK_THROWS_AS(laplacian_ball_measures(4, 1.0), DomainError);
  CHECK_THROWS_AS(laplacian_ball_measures(2, 0.0), DomainError);
}

TEST_CASE("M and N operators") {
  auto g1 = make_abelian(1);
  auto m1 = laplacian_ball_measures(1, 1.0);
  std::vector<double> zero{0.0};
  CHECK(M_op(parse("x1^2", g1.vars), g1, m1, zero) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(N_op(Expr(2), g1, m1, zero) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(N_op(Expr(0), g1, m1, zero) == 0);
  for (std::size_t n : {1, 2, 3}) {
    auto g = make_abelian(n);
    auto mp = laplacian_ball_measures(n, 0.7);
    auto lin = parse(n == 1 ? "3*x1 - 1" : "3*x1 - 2*x2 + 1", g.vars);
    for (const auto& x : probe_points(n)) {
      CHECK(M_op(Expr(1), g, mp, x) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(M_op(lin, g, mp, x) == doctest::Approx(evaluate(lin, x)).epsilon(1e-12));
      // monotone and positive
      auto lo = parse("x1^2", g.vars), hi = parse("x1^2 + exp(x1)", g.vars);
      CHECK(M_op(lo, g, mp, x) <= M_op(hi, g, mp, x));
      CHECK(N_op(lo, g, mp, x) <= N_op(hi, g, mp, x));
      CHECK(N_op(lo, g, mp, x) >= 0);
    }
  }
  // continuity on a grid: M(u) is Lipschitz with the constant of u
  auto g2 = make_abelian(2);
  auto mp2 = laplacian_ball_measures(2, 0.5);
  auto u = parse("sin(x1 + x2)", g2.vars);  // Lipschitz constant sqrt(2)
  for (double a = -1; a < 1; a += 0.25) {
    std::vector<double> p{a, 0.1}, q{a + 0.25, 0.1};
    CHECK(std::abs(M_op(u, g2, mp2, p) - M_op(u, g2, mp2, q)) <= std::sqrt(2.0) * 0.25 + 1e-12);
  }
  // M(u) = 0 on a grid for u >= 0 forces u = 0 on the swept points
  auto far = polynomial_bump({3, 3}, {Rational(1, 2), Rational(1, 2)});
  PointFunction fu = [&](std::span<const double> p) { return far(p); };
  double swept = 0;
  for (double a = -1; a <= 1; a += 0.5)
    for (double b = -1; b <= 1; b += 0.5) {
      std::vector<double> x{a, b};
      CHECK(M_op(fu, g2, mp2, x) == 0);
      for (const auto& y : mp2.sphere_nodes) swept = std::max(swept, far(multiply(g2, x, y)));
    }
  CHECK(swept <= 1e-14);
}

TEST_CASE("representation formula for the Laplacian") {
  struct Item {
    std::size_t n;
    const char* u;
  };
  std::vector<Item> items = {
      {1, "x1"}, {1, "x1^2"}, {1, "x1^3"}, {1, "exp(x1)"}, {1, "1 + x1"},
      {2, "x1^2 - x2^2"}, {2, "x1*x2"}, {2, "x1^3 - 3*x1*x2^2"}, {2, "x1^2"}, {2, "exp(x1)"}, {2, "x2^3 + x1"},
      {3, "x1*x2*x3"}, {3, "x1^2 + x2^2 - 2*x3^2"}, {3, "exp(x1)"},
  };
  for (const auto& it : items) {
    CAPTURE(it.u);
    auto g = make_abelian(it.n);
    auto u = parse(it.u, g.vars);
    for (double r : {0.5, 1.0}) {
      auto mp = laplacian_ball_measures(it.n, r);
      CHECK(representation_residual(u, laplacian(it.n), g, mp, probe_points(it.n)) <= 1e-6);
    }
  }
  // the closed-form 1-D example
  auto g1 = make_abelian(1);
  std::vector<std::vector<double>> origin{{0.0}};
  CHECK(representation_residual(parse("x1^2", g1.vars), laplacian(1), g1, laplacian_ball_measures(1, 1.0), origin) <=
        1e-14);
  CHECK_THROWS_AS(representation_residual(parse("x1", g1.vars), heat_operator(1), make_abelian(2),
                                          laplacian_ball_measures(2, 1.0), origin),
                  DomainError);
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  CHECK_THROWS_AS(representation_residual(parse("x1", gh.vars), laplacian(3), gh, laplacian_ball_measures(3, 1.0),
                                          {{0, 0, 0}}),
                  DomainError);
}

TEST_CASE("mass identity") {
  auto g1 = make_abelian(1);
  auto bump1 = polynomial_bump({0}, {1}, 2);
  auto mp1 = laplacian_ball_measures(1, 0.25);
  auto m = mass_identity(bump1, g1, mp1, 3.0);
  CHECK(m.rhs == doctest::Approx(16.0 / 15.0).epsilon(1e-12));
  CHECK(m.residual <= 1e-6);
  CompactFunction zero{Expr(0), {-1}, {1}, nullptr};
  CHECK(mass_identity_residual(zero, g1, mp1, 3.0) == 0);
  CHECK_THROWS_AS(mass_identity(bump1, g1, mp1, 1.1), DomainError);

  auto start = std::chrono::steady_clock::now();
  auto gh = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  auto bump3 = polynomial_bump({0, 0, 0}, {1, 1, 1}, 2);
  auto mp3 = laplacian_ball_measures(3, 0.25, {4, 8});
  auto mh = mass_identity(bump3, gh, mp3, 2.0);
  CHECK(mh.rhs == doctest::Approx(std::pow(16.0 / 15.0, 3)).epsilon(1e-10));
  CHECK(mh.residual <= 1e-5);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("Heisenberg mass identity: residual " << mh.residual << " in " << secs << " s");
  CHECK(secs < 30);
}

TEST_CASE("subharmonic mechanism") {
  // u = bump: int N(Lu) = int M(u) - int u, both sides vanish up to quadrature
  auto g1 = make_abelian(1);
  auto bump = polynomial_bump({0}, {1}, 4);
  auto mp = laplacian_ball_measures(1, 0.5);
  auto lu = apply(laplacian(1), bump.core);
  CompiledExpr clu(lu);
  PointFunction flu = [&](std::span<const double> p) { return bump.contains(p) ? clu(p) : 0.0; };
  auto m = mass_identity(bump, g1, mp, 2.0);
  std::vector<double> lo{-2}, hi{2};
  double n_side = integrate_box([&](std::span<const double> x) { return N_op(flu, g1, mp, x); }, lo, hi, 8, 64);
  CHECK(std::abs(n_side - (m.lhs - m.rhs)) <= 1e-6);
}
