#pragma once

#include "lieop/group.hpp"
#include "lieop/symbolic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lieop {

/// sum_i coeffs[i] * d/dx_i
struct VectorField {
  std::vector<Expr> coeffs;
  std::string label;

  std::size_t dim() const { return coeffs.size(); }
  bool is_zero() const;
};

/// d/dx_i for each i, labelled "d_<name>".
std::vector<VectorField> coordinate_frame(const VarSet& vars);
VectorField coordinate_field(const VarSet& vars, std::size_t i);

Expr apply_field(const VectorField& x, const Expr& u);

/// [X, Y]_i = X(Y_i) - Y(X_i), labelled "[X,Y]".
VectorField lie_bracket(const VectorField& x, const VectorField& y);

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& c, const VectorField& a);

/// Columns of d(x.y)/dy at y = e, labelled "X_<name>".
std::vector<VectorField> left_invariant_frame(const GroupLaw& g);

/// Polynomial, exponential and trigonometric probes used by invariance checks.
std::vector<Expr> invariance_bank(std::size_t dim);

/// max over sampled g, x and bank functions u of |X(u o tau_g)(x) - (Xu)(g.x)|,
/// evaluated through the exact chain rule. Points in [-1, 1].
double left_invariance_residual(const VectorField& x, const GroupLaw& g, const SampleSpec& samples = {});

struct BracketCertificate {
  std::size_t achieved_rank = 0;
  std::size_t dim = 0;
  /// First depth at which full rank was reached, else the deepest level explored.
  std::size_t depth = 0;
  bool full_rank = false;
  std::vector<std::string> witnesses;
  std::string rank_method;  // "exact" or "svd"
  std::size_t fields_examined = 0;
};

/// Breadth-first iterated brackets [X_i, level d-1] up to max_depth (default
/// dim + 2), deduplicated by an 8-point fingerprint confirmed with equal_on_samples.
BracketCertificate hormander_rank(const std::vector<VectorField>& fields, const std::vector<Rational>& point,
                                  std::optional<std::size_t> max_depth = std::nullopt);

}  // namespace lieop
