#pragma once

// Kolmogorov-type operators  div(A grad) + <Bx, grad> - d_t  on (x1..xn, t),
// with constant A (symmetric PSD) and B.

#include "lieop/bump.hpp"
#include "lieop/group.hpp"
#include "lieop/operator.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lieop {

struct KolmogorovSpec {
  std::size_t n = 0;
  RationalMatrix a;
  RationalMatrix b;
};

/// Validates shapes, symmetry of A and min eig(A) >= -1e-12.
KolmogorovSpec make_kolmogorov(const RationalMatrix& a, const RationalMatrix& b);

/// The operator itself, variables (x1..xn, t).
SecondOrderOperator operator_of(const KolmogorovSpec& spec);

/// E(s) = exp(-sB)
Eigen::MatrixXd propagator(const KolmogorovSpec& spec, double s);

/// C(t) = int_0^t E(s) A E(s)^T ds, adaptive Gauss-Legendre, symmetrized.
Eigen::MatrixXd covariance(const KolmogorovSpec& spec, double t);

/// Smallest eigenvalue of D^{-1/2} C D^{-1/2}, D = diag(C); 0 when some
/// diagonal entry is below 1e-14 * trace(C) (or C vanishes).
double scaled_min_eigenvalue(const Eigen::MatrixXd& c);

struct CovarianceReport {
  std::vector<double> t_samples;
  std::vector<double> min_eigenvalues;         // of C(t)
  std::vector<double> scaled_min_eigenvalues;  // of the Jacobi-scaled C(t)
  bool positive_definite = false;
  std::size_t kalman_rank = 0;
  std::size_t n = 0;
  double tol = 0;
  std::string verdict;  // "pass", "fail" or "inconsistent"
};

std::vector<double> default_t_samples();

/// Quadrature criterion (every scaled min eigenvalue > tol) against the Kalman
/// rank of [S, BS, ..., B^{n-1}S], S a column factor of A. Disagreement is "inconsistent".
CovarianceReport hypoellipticity_check(const KolmogorovSpec& spec, const std::vector<double>& t_samples = default_t_samples(),
                                       double tol = 1e-10);

std::size_t kalman_rank(const KolmogorovSpec& spec);

/// e^{t trace B} dx dt
DensityFn weight(const KolmogorovSpec& spec);

/// (x, t).(x', t') = (x' + E(t') x, t + t')
GroupLaw group_law(const KolmogorovSpec& spec);

/// (4 pi)^{-n/2} det C(t)^{-1/2} e^{-t trace B} exp(-<C(t)^{-1} x, x> / 4).
/// Its x-integral is e^{-t trace B}. Throws DomainError when C(t) is singular.
double gaussian_kernel(const KolmogorovSpec& spec, double t, std::span<const double> x);

/// Same kernel with the Cholesky factor of C(t) cached per t. Not thread-safe.
class GaussianKernel {
 public:
  explicit GaussianKernel(KolmogorovSpec spec) : spec_(std::move(spec)) {}
  double operator()(double t, std::span<const double> x) const;
  const KolmogorovSpec& spec() const { return spec_; }

 private:
  struct Factor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_prefactor = 0;
  };
  const Factor& factor(double t) const;
  KolmogorovSpec spec_;
  mutable std::map<double, Factor> cache_;
};

/// max over points of |L Gamma| / (|div(A grad Gamma)| + |<Bx, grad Gamma>| + |d_t Gamma|),
/// L applied by central differences. Points are (x1..xn, t) with t > 0.
double kernel_annihilation_residual(const KolmogorovSpec& spec, const std::vector<std::vector<double>>& points);

/// int Gamma(t, x) dx over the box |x_i| <= 10 sqrt(2 C_ii(t)).
double kernel_mass(const KolmogorovSpec& spec, double t, std::size_t order = 24, std::size_t panels = 8);

/// |int_{t >= 0} u L*phi| over the support box of phi, u extended by zero for t < 0.
/// u must vanish (1e-10) on the slice t = 0 of the box. `grid` is the quadrature box;
/// it defaults to the support box and must cover it.
double weak_prolongation_residual(const KolmogorovSpec& spec, const PointFunction& u, const CompactFunction& phi,
                                  std::size_t order = 16, std::size_t panels = 4,
                                  const std::optional<std::pair<std::vector<double>, std::vector<double>>>& grid =
                                      std::nullopt);
double weak_prolongation_residual(const KolmogorovSpec& spec, const Expr& u, const CompactFunction& phi,
                                  std::size_t order = 16, std::size_t panels = 4);

}  // namespace lieop
