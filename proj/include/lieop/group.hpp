#pragma once

// Lie group laws on R^n given by explicit product maps.

#include "lieop/expr_matrix.hpp"
#include "lieop/symbolic.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lieop {

enum class GroupFamily { Abelian, MatrixExponential, InverseMatrixExponential, ProductWithTime, Custom };

std::string to_string(GroupFamily f);

struct GroupLaw {
  std::size_t dim = 0;
  VarSet vars;
  /// dim expressions in 2*dim variables: 0..dim-1 the left factor, dim..2dim-1 the right one.
  std::vector<Expr> product;
  std::vector<Rational> identity;
  /// Optional closed-form inverse, dim expressions in dim variables.
  std::optional<std::vector<Expr>> inverse;
  GroupFamily family = GroupFamily::Custom;
  std::optional<RationalMatrix> matrix;
  std::shared_ptr<const GroupLaw> inner;
  bool numeric_coefficients = false;

  /// d product / d left block and d product / d right block.
  ExprMatrix d_left;
  ExprMatrix d_right;
  std::vector<CompiledExpr> compiled;
};

/// Fills derived members (Jacobian blocks, compiled product); call after
/// editing a GroupLaw by hand.
void finalize(GroupLaw& g);

GroupLaw make_abelian(std::size_t n);
/// (t, x) . (t', x') = (t + t', x + exp(tB) x')
GroupLaw make_matrix_exponential(const RationalMatrix& b);
/// (t, x) . (t', x') = (t + t', x' + exp(t'B) x)
GroupLaw make_inverse_matrix_exponential(const RationalMatrix& b);
/// inner x R with the time coordinate appended last.
GroupLaw make_product_with_time(const GroupLaw& inner);
GroupLaw make_custom(VarSet vars, std::vector<Expr> product, std::vector<Rational> identity,
                     std::optional<std::vector<Expr>> inverse = std::nullopt);

/// Dispatcher over the built-in families. `n` is used only for Abelian.
GroupLaw make_group(GroupFamily family, const std::optional<RationalMatrix>& b, const GroupLaw* inner,
                    std::size_t n = 0);

std::vector<double> multiply(const GroupLaw& g, std::span<const double> x, std::span<const double> y);

/// Inverse from the closed form when present, else Newton on y -> x.y = e.
std::vector<double> invert(const GroupLaw& g, std::span<const double> x);

enum class Side { Left, Right };

/// Right: Jacobian of y -> y.g at `at`. Left: Jacobian of y -> g.y at `at`.
Eigen::MatrixXd translation_jacobian(const GroupLaw& g, Side side, std::span<const double> gpt,
                                     std::span<const double> at);

/// Symbolic Jacobian at the identity of y -> y.x (Right) or y -> x.y (Left), as expressions in x.
ExprMatrix translation_jacobian_at_identity(const GroupLaw& g, Side side);

struct DensityFn {
  Expr w;
  std::string note;
};

/// w(x) = 1 / det J_{rho_x}(e). Throws DomainError when the reciprocal is not in
/// the expression ring (it is for every built-in family).
DensityFn right_invariant_density(const GroupLaw& g, const SampleSpec& samples = {});
/// 1 / det J_{tau_x}(e).
DensityFn left_invariant_density(const GroupLaw& g, const SampleSpec& samples = {});

struct GroupCheck {
  double identity_residual = 0;
  double associativity_residual = 0;
  double inverse_residual = 0;
  bool inverse_closed_form = false;
  bool ok(double tol = 1e-8) const {
    return identity_residual <= tol && associativity_residual <= tol && inverse_residual <= tol;
  }
};

/// Group axioms at sampled points; residuals are max |a - b| / (1 + |b|).
GroupCheck check_group(const GroupLaw& g, const SampleSpec& samples = {});

/// max over sampled y, x of |w(y.x) |det J_{rho_x}(y)| - w(y)| / |w(y)|.
double right_invariance_residual(const GroupLaw& g, const DensityFn& w, const SampleSpec& samples = {});

struct UnimodularReport {
  bool unimodular = false;
  double max_ratio_deviation = 0;  // relative spread of (left density / right density)
};

UnimodularReport unimodularity(const GroupLaw& g, const SampleSpec& samples = {}, double rtol = 1e-8);
inline bool is_unimodular(const GroupLaw& g, const SampleSpec& samples = {}) {
  return unimodularity(g, samples).unimodular;
}

/// Integral of the right-invariant density over [-R, R]^dim.
double haar_mass_partial(const GroupLaw& g, double r, std::size_t order = 32);
double haar_mass_partial(const DensityFn& w, std::size_t dim, double r, std::size_t order = 32);

}  // namespace lieop
