#include "lieop/matexp.hpp"

#include "lieop/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace lieop {

namespace {

void trim(Polynomial& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

std::size_t degree(const Polynomial& p) { return p.empty() ? 0 : p.size() - 1; }

Polynomial derivative(const Polynomial& p) {
  Polynomial d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long long>(i));
  trim(d);
  return d;
}

Polynomial monic(Polynomial p) {
  trim(p);
  if (p.empty()) return p;
  Rational lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

// Quotient and remainder of a / b (b nonzero).
std::pair<Polynomial, Polynomial> divmod(Polynomial a, const Polynomial& b) {
  trim(a);
  Polynomial q;
  if (a.size() < b.size()) return {q, a};
  q.assign(a.size() - b.size() + 1, Rational(0));
  for (std::size_t k = q.size(); k-- > 0;) {
    Rational c = a[k + b.size() - 1] / b.back();
    q[k] = c;
    if (c == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) a[k + j] -= c * b[j];
  }
  a.resize(b.size() - 1);
  trim(a);
  trim(q);
  return {q, a};
}

Polynomial gcd(Polynomial a, Polynomial b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

Polynomial subtract(Polynomial a, const Polynomial& b) {
  if (a.size() < b.size()) a.resize(b.size(), Rational(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim(a);
  return a;
}

Rational eval(const Polynomial& p, const Rational& x) {
  Rational v = 0;
  for (std::size_t k = p.size(); k-- > 0;) v = v * x + p[k];
  return v;
}

std::vector<std::complex<double>> numeric_roots(const Polynomial& p) {
  const std::size_t n = degree(p);
  if (n == 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < n; ++i) comp(i, n - 1) = -to_double(p[i] / p.back());
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

std::optional<Rational> rational_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  BigInt num = numerator(r), den = denominator(r);
  BigInt sn = boost::multiprecision::sqrt(num), sd = boost::multiprecision::sqrt(den);
  if (sn * sn != num || sd * sd != den) return std::nullopt;
  return Rational(sn, sd);
}

// One eigenvalue class of the characteristic polynomial.
struct Root {
  Rational re;
  Rational im;  // > 0 for a conjugate pair, 0 for a real root
  unsigned multiplicity;
};

// Roots of a squarefree factor; sets `numeric` when rounding was needed.
std::vector<Root> roots_of(Polynomial f, unsigned mult, bool& numeric) {
  std::vector<Root> out;
  // Rational roots first: numeric candidates, confirmed exactly.
  for (bool found = true; found && degree(f) > 0;) {
    found = false;
    if (f[0] == 0) {
      out.push_back({0, 0, mult});
      f.erase(f.begin());
      found = true;
      continue;
    }
    for (const auto& z : numeric_roots(f)) {
      if (std::abs(z.imag()) > 1e-6 * (1 + std::abs(z))) continue;
      auto r = rationalize(z.real(), 1000000, 1e-6 * (1 + std::abs(z.real())));
      if (!r || eval(f, *r) != 0) continue;
      out.push_back({*r, 0, mult});
      f = divmod(f, Polynomial{-*r, 1}).first;
      found = true;
      break;
    }
  }
  f = monic(f);
  const std::size_t deg = degree(f);
  if (deg == 0) return out;
  if (deg == 2) {
    const Rational& b = f[1];
    const Rational& c = f[0];
    Rational disc = b * b - 4 * c;
    if (disc < 0) {
      Rational beta2 = -disc / 4;
      auto beta = rational_sqrt(beta2);
      if (!beta) {
        numeric = true;
        beta = exact_rational(std::sqrt(to_double(beta2)));
      }
      out.push_back({-b / 2, *beta, mult});
    } else {
      numeric = true;
      double s = std::sqrt(to_double(disc));
      out.push_back({exact_rational((-to_double(b) - s) / 2), 0, mult});
      out.push_back({exact_rational((-to_double(b) + s) / 2), 0, mult});
    }
    return out;
  }
  numeric = true;
  for (const auto& z : numeric_roots(f)) {
    if (std::abs(z.imag()) <= 1e-12 * (1 + std::abs(z)))
      out.push_back({exact_rational(z.real()), 0, mult});
    else if (z.imag() > 0)
      out.push_back({exact_rational(z.real()), exact_rational(z.imag()), mult});
  }
  return out;
}

}  // namespace

Polynomial characteristic_polynomial(const RationalMatrix& b) {
  if (!b.square()) throw DimensionError("characteristic polynomial of a non-square matrix");
  const std::size_t n = b.rows();
  Polynomial c(n + 1, Rational(0));
  c[n] = 1;
  RationalMatrix m(n, n);
  const RationalMatrix id = RationalMatrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    m = b * m + c[n - k + 1] * id;
    c[n - k] = -(b * m).trace() / static_cast<long long>(k);
  }
  return c;
}

std::vector<std::pair<Polynomial, unsigned>> squarefree_decomposition(const Polynomial& p0) {
  std::vector<std::pair<Polynomial, unsigned>> out;
  Polynomial p = monic(p0);
  if (degree(p) == 0) return out;
  Polynomial dp = derivative(p);
  Polynomial a = gcd(p, dp);
  Polynomial b = divmod(p, a).first;
  Polynomial c = divmod(dp, a).first;
  Polynomial d = subtract(c, derivative(b));
  for (unsigned i = 1; degree(b) > 0; ++i) {
    a = gcd(b, d);
    if (a.empty()) a = Polynomial{1};
    if (degree(a) > 0) out.emplace_back(a, i);
    b = divmod(b, a).first;
    c = divmod(d, a).first;
    d = subtract(c, derivative(b));
  }
  return out;
}

SymbolicExponential symbolic_exp(const RationalMatrix& bm, int t_var) {
  if (!bm.square()) throw DimensionError("exp(tB) needs a square B");
  const std::size_t n = bm.rows();
  SymbolicExponential result;
  if (n == 0) return result;

  std::vector<Root> roots;
  for (const auto& [f, mult] : squarefree_decomposition(characteristic_polynomial(bm))) {
    auto r = roots_of(f, mult, result.numeric_coefficients);
    roots.insert(roots.end(), r.begin(), r.end());
  }

  // Real fundamental system of the scalar ODE.
  const Expr t = Expr::variable(t_var);
  std::vector<Expr> basis;
  for (const auto& r : roots) {
    for (unsigned j = 0; j < r.multiplicity; ++j) {
      Expr tj = pow(t, j);
      Expr growth = Expr::exp(Affine::variable(t_var, r.re));
      if (r.im == 0) {
        basis.push_back(tj * growth);
      } else {
        basis.push_back(tj * growth * Expr::cos(Affine::variable(t_var, r.im)));
        basis.push_back(tj * growth * Expr::sin(Affine::variable(t_var, r.im)));
      }
    }
  }
  if (basis.size() != n) throw Error("internal: fundamental system has the wrong size");

  // Wronskian at t = 0, exact.
  std::vector<Rational> origin(static_cast<std::size_t>(t_var) + 1, Rational(0));
  RationalMatrix w(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Expr g = basis[j];
    for (std::size_t i = 0; i < n; ++i) {
      auto v = evaluate_exact(g, origin);
      if (!v) throw Error("internal: non-exact Wronskian entry");
      w(i, j) = *v;
      g = differentiate(g, t_var);
    }
  }
  auto winv = exact_inverse(w);
  if (!winv) throw DomainError("fundamental system is degenerate at t = 0");

  // exp(tB) = sum_j basis_j(t) * M_j, M_j = sum_k winv(j, k) B^k.
  std::vector<RationalMatrix> powers{RationalMatrix::identity(n)};
  for (std::size_t k = 1; k < n; ++k) powers.push_back(bm * powers.back());
  result.entries.assign(n, std::vector<Expr>(n));
  std::vector<std::vector<std::vector<Expr>>> terms(n, std::vector<std::vector<Expr>>(n));
  for (std::size_t j = 0; j < n; ++j) {
    RationalMatrix mj(n, n);
    for (std::size_t k = 0; k < n; ++k)
      if ((*winv)(j, k) != 0) mj = mj + (*winv)(j, k) * powers[k];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        Rational c = mj(a, b);
        if (result.numeric_coefficients) {
          double cd = to_double(c);
          c = std::abs(cd) < 1e-14 ? Rational(0) : exact_rational(cd);
        }
        if (c != 0) terms[a][b].push_back(Expr(c) * basis[j]);
      }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) result.entries[a][b] = Expr::sum(std::move(terms[a][b]));
  return result;
}

}  // namespace lieop
