#include "lieop/kolmogorov.hpp"

#include "lieop/linalg.hpp"
#include "lieop/matexp.hpp"
#include "lieop/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace lieop {

KolmogorovSpec make_kolmogorov(const RationalMatrix& a, const RationalMatrix& b) {
  if (!a.square() || !b.square() || a.rows() != b.rows() || a.rows() == 0)
    throw DimensionError("A and B must be square matrices of the same positive size");
  if (!a.is_symmetric()) throw DomainError("A must be symmetric");
  if (min_eigenvalue_symmetric(to_eigen(a)) < -1e-12) throw DomainError("A must be positive semidefinite");
  return {a.rows(), a, b};
}

SecondOrderOperator operator_of(const KolmogorovSpec& spec) {
  const std::size_t n = spec.n;
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("t");
  ExprMatrix a(n + 1, std::vector<Expr>(n + 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = Expr(spec.a(i, j));
  std::vector<Expr> b = multiply(expr_matrix(spec.b), variables(0, n));
  b.push_back(Expr(-1));
  return SecondOrderOperator(VarSet(names, n), a, b);
}

Eigen::MatrixXd propagator(const KolmogorovSpec& spec, double s) { return expm(-s * to_eigen(spec.b)); }

Eigen::MatrixXd covariance(const KolmogorovSpec& spec, double t) {
  if (!(t > 0)) throw DomainError("covariance needs t > 0");
  const Eigen::MatrixXd a = to_eigen(spec.a), b = to_eigen(spec.b);
  Eigen::MatrixXd c = integrate_adaptive(
      [&](double s) {
        Eigen::MatrixXd e = expm(-s * b);
        return Eigen::MatrixXd(e * a * e.transpose());
      },
      0.0, t);
  return (c + c.transpose()) / 2;
}

double scaled_min_eigenvalue(const Eigen::MatrixXd& c) {
  const double tr = c.trace();
  if (!(tr > 0)) return 0;
  Eigen::VectorXd d = c.diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) <= 1e-14 * tr) return 0;
    d(i) = 1 / std::sqrt(d(i));
  }
  return min_eigenvalue_symmetric(d.asDiagonal() * c * d.asDiagonal());
}

std::vector<double> default_t_samples() { return {1e-3, 1e-2, 1e-1, 1, 10}; }

std::size_t kalman_rank(const KolmogorovSpec& spec) {
  const std::size_t n = spec.n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(spec.a));
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-12) cols.push_back(std::sqrt(es.eigenvalues()(i)) * es.eigenvectors().col(i));
  if (cols.empty()) return 0;
  const Eigen::MatrixXd b = to_eigen(spec.b);
  Eigen::MatrixXd s(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) s.col(j) = cols[j];
  Eigen::MatrixXd k(n, n * cols.size());
  Eigen::MatrixXd block = s;
  for (std::size_t p = 0; p < n; ++p) {
    k.middleCols(p * cols.size(), cols.size()) = block;
    block = b * block;
  }
  return numeric_rank(k);
}

CovarianceReport hypoellipticity_check(const KolmogorovSpec& spec, const std::vector<double>& t_samples, double tol) {
  if (t_samples.empty()) throw DomainError("hypoellipticity_check needs at least one t sample");
  CovarianceReport r;
  r.n = spec.n;
  r.tol = tol;
  r.t_samples = t_samples;
  r.positive_definite = true;
  for (double t : t_samples) {
    if (!(t > 0)) throw DomainError("t samples must be positive");
    Eigen::MatrixXd c = covariance(spec, t);
    r.min_eigenvalues.push_back(min_eigenvalue_symmetric(c));
    double s = scaled_min_eigenvalue(c);
    r.scaled_min_eigenvalues.push_back(s);
    r.positive_definite = r.positive_definite && s > tol;
  }
  r.kalman_rank = kalman_rank(spec);
  const bool kalman = r.kalman_rank == spec.n;
  if (kalman != r.positive_definite)
    r.verdict = "inconsistent";
  else
    r.verdict = kalman ? "pass" : "fail";
  return r;
}

DensityFn weight(const KolmogorovSpec& spec) {
  return {Expr::exp(Affine::variable(static_cast<int>(spec.n), spec.b.trace())), "exp(t * trace B)"};
}

GroupLaw group_law(const KolmogorovSpec& spec) {
  const std::size_t n = spec.n, dim = n + 1;
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("t");
  // E(t') with t' the last variable of the right factor
  auto e = symbolic_exp(-spec.b, static_cast<int>(2 * dim - 1));
  auto moved = multiply(e.entries, variables(0, n));
  std::vector<Expr> product;
  for (std::size_t i = 0; i < n; ++i) product.push_back(Expr::variable(static_cast<int>(dim + i)) + moved[i]);
  product.push_back(Expr::variable(static_cast<int>(n)) + Expr::variable(static_cast<int>(2 * dim - 1)));
  // (x, t)^{-1} = (-E(-t) x, -t)
  auto einv = symbolic_exp(spec.b, static_cast<int>(n));
  std::vector<Expr> inverse;
  for (const auto& v : multiply(einv.entries, variables(0, n))) inverse.push_back(-v);
  inverse.push_back(-Expr::variable(static_cast<int>(n)));
  GroupLaw g = make_custom(VarSet(names, n), product, std::vector<Rational>(dim, Rational(0)), inverse);
  g.matrix = spec.b;
  g.numeric_coefficients = e.numeric_coefficients || einv.numeric_coefficients;
  return g;
}

const GaussianKernel::Factor& GaussianKernel::factor(double t) const {
  auto it = cache_.find(t);
  if (it != cache_.end()) return it->second;
  Eigen::MatrixXd c = covariance(spec_, t);
  if (scaled_min_eigenvalue(c) <= 1e-12) throw DomainError("covariance is singular at the requested t");
  Factor f;
  f.llt.compute(c);
  double logdet = 0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) logdet += 2 * std::log(f.llt.matrixL()(i, i));
  f.log_prefactor = -0.5 * static_cast<double>(spec_.n) * std::log(4 * std::numbers::pi) - 0.5 * logdet -
                    t * to_double(spec_.b.trace());
  return cache_.emplace(t, std::move(f)).first->second;
}

double GaussianKernel::operator()(double t, std::span<const double> x) const {
  if (x.size() != spec_.n) throw DimensionError("kernel point has the wrong length");
  const Factor& f = factor(t);
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  return std::exp(f.log_prefactor - xv.dot(f.llt.solve(xv)) / 4);
}

double gaussian_kernel(const KolmogorovSpec& spec, double t, std::span<const double> x) {
  return GaussianKernel(spec)(t, x);
}

double kernel_annihilation_residual(const KolmogorovSpec& spec, const std::vector<std::vector<double>>& points) {
  const std::size_t n = spec.n;
  const Eigen::MatrixXd a = to_eigen(spec.a), b = to_eigen(spec.b);
  GaussianKernel kernel(spec);
  auto gamma = [&](const std::vector<double>& p) { return kernel(p[n], std::span<const double>(p.data(), n)); };
  // steps follow the kernel's own length scales: sqrt(2 C_ii(t)) in x_i, t in time
  std::vector<double> h(n + 1);
  auto set_steps = [&](double t) {
    Eigen::MatrixXd c = covariance(spec, t);
    for (std::size_t i = 0; i < n; ++i) h[i] = 1e-3 * std::min(1.0, std::sqrt(2 * c(i, i)));
    h[n] = 1e-3 * std::min(1.0, t);
  };
  auto shifted = [&](std::vector<double> p, std::size_t i, double di, std::size_t j, double dj) {
    p[i] += di;
    p[j] += dj;
    return gamma(p);
  };
  auto d1 = [&](const std::vector<double>& p, std::size_t i) {
    auto d = [&](double s) { return (shifted(p, i, s, i, 0) - shifted(p, i, -s, i, 0)) / (2 * s); };
    return (4 * d(h[i] / 2) - d(h[i])) / 3;
  };
  auto d2 = [&](const std::vector<double>& p, std::size_t i, std::size_t j) {
    if (i == j) {
      const double g0 = gamma(p);
      auto d = [&](double s) { return (shifted(p, i, s, i, 0) - 2 * g0 + shifted(p, i, -s, i, 0)) / (s * s); };
      return (4 * d(h[i] / 2) - d(h[i])) / 3;
    }
    auto d = [&](double s, double r) {
      return (shifted(p, i, s, j, r) - shifted(p, i, s, j, -r) - shifted(p, i, -s, j, r) + shifted(p, i, -s, j, -r)) /
             (4 * s * r);
    };
    return (4 * d(h[i] / 2, h[j] / 2) - d(h[i], h[j])) / 3;
  };
  double worst = 0;
  for (const auto& p : points) {
    if (p.size() != n + 1) throw DimensionError("points are (x1..xn, t)");
    if (!(p[n] > 0)) throw DomainError("kernel residual needs t > 0");
    set_steps(p[n]);
    Eigen::Map<const Eigen::VectorXd> x(p.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd bx = b * x;
    double second = 0, drift = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (bx(i) != 0) drift += bx(i) * d1(p, i);
      for (std::size_t j = 0; j < n; ++j)
        if (a(i, j) != 0) second += a(i, j) * d2(p, i, j);
    }
    const double dt = d1(p, n);
    const double scale = std::abs(second) + std::abs(drift) + std::abs(dt);
    if (scale < 1e-300) continue;
    worst = std::max(worst, std::abs(second + drift - dt) / scale);
  }
  return worst;
}

double kernel_mass(const KolmogorovSpec& spec, double t, std::size_t order, std::size_t panels) {
  Eigen::MatrixXd c = covariance(spec, t);
  std::vector<double> lo(spec.n), hi(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    hi[i] = 10 * std::sqrt(2 * c(i, i));
    lo[i] = -hi[i];
  }
  GaussianKernel kernel(spec);
  return integrate_box([&](std::span<const double> x) { return kernel(t, x); }, lo, hi, order, panels);
}

double weak_prolongation_residual(const KolmogorovSpec& spec, const PointFunction& u, const CompactFunction& phi,
                                  std::size_t order, std::size_t panels,
                                  const std::optional<std::pair<std::vector<double>, std::vector<double>>>& grid) {
  const std::size_t n = spec.n, dim = n + 1;
  if (phi.lo.size() != dim) throw DimensionError("test function lives on (x1..xn, t)");
  std::vector<double> lo = phi.lo, hi = phi.hi;
  if (grid) {
    const auto& [glo, ghi] = *grid;
    if (glo.size() != dim || ghi.size() != dim) throw DimensionError("quadrature box has the wrong dimension");
    for (std::size_t i = 0; i < dim; ++i)
      if (glo[i] > phi.lo[i] || ghi[i] < phi.hi[i]) throw DomainError("quadrature box does not cover the support of phi");
    lo = glo;
    hi = ghi;
  }
  // trace check on the t = 0 slice
  if (lo[n] <= 0 && hi[n] >= 0) {
    SampleSpec s;
    s.count = 64;
    s.lo = 0;
    s.hi = 1;
    for (const auto& q : sample_points(n, s)) {
      std::vector<double> p(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) p[i] = lo[i] + q[i] * (hi[i] - lo[i]);
      if (std::abs(u(p)) > 1e-10) throw DomainError("u does not vanish at t = 0");
    }
  }
  if (hi[n] <= 0) return 0;
  lo[n] = std::max(lo[n], 0.0);
  CompiledExpr adj(apply(formal_adjoint(operator_of(spec)), phi.core));
  double v = integrate_box(
      [&](std::span<const double> p) { return phi.contains(p) ? u(p) * adj(p) : 0.0; }, lo, hi, order, panels);
  return std::abs(v);
}

double weak_prolongation_residual(const KolmogorovSpec& spec, const Expr& u, const CompactFunction& phi,
                                  std::size_t order, std::size_t panels) {
  if (max_var_index(u) > static_cast<int>(spec.n)) throw DimensionError("u depends on variables beyond (x, t)");
  CompiledExpr cu(u);
  return weak_prolongation_residual(spec, [&](std::span<const double> p) { return cu(p); }, phi, order, panels);
}

}  // namespace lieop
