#pragma once

// Second-order operators  sum a_ij d_i d_j + sum b_j d_j  with expression coefficients.

#include "lieop/expr_matrix.hpp"
#include "lieop/fields.hpp"
#include "lieop/group.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lieop {

class SecondOrderOperator {
 public:
  SecondOrderOperator() = default;
  /// Reads the upper triangle of `a` and mirrors it. With `check_psd`, A(x)
  /// must have smallest eigenvalue >= -1e-10 at sampled points.
  SecondOrderOperator(VarSet vars, const ExprMatrix& a, std::vector<Expr> b, bool check_psd = true);

  const VarSet& vars() const { return vars_; }
  std::size_t dim() const { return vars_.size(); }
  const Expr& a(std::size_t i, std::size_t j) const { return a_[i][j]; }
  const ExprMatrix& a() const { return a_; }
  const std::vector<Expr>& b() const { return b_; }

 private:
  VarSet vars_;
  ExprMatrix a_;
  std::vector<Expr> b_;
};

/// Output type of formal_adjoint: a zero-order term is allowed here.
struct AdjointOperator {
  VarSet vars;
  ExprMatrix a;
  std::vector<Expr> b;
  Expr c;
};

struct DecomposedOperator {
  std::vector<VectorField> fields;  // X_1..X_n
  VectorField drift;                // X_0
};

/// "a11*d_x1^2 + 2*a12*d_x1*d_x2 + ... + b1*d_x1 + ...", zero terms omitted.
std::string to_string(const SecondOrderOperator& l);

SecondOrderOperator laplacian(std::size_t n);
/// sum_i d_xi^2 - d_t on (x1..xn, t).
SecondOrderOperator heat_operator(std::size_t n);

/// sum_j w_j X_j^2 + X_0; weights default to 1 and must be non-negative.
SecondOrderOperator from_frame(const std::vector<VectorField>& fields, const std::optional<VectorField>& drift,
                               const VarSet& vars, const std::vector<Rational>& weights = {});

Expr apply(const SecondOrderOperator& l, const Expr& u);
Expr apply(const AdjointOperator& l, const Expr& u);

DecomposedOperator decompose(const SecondOrderOperator& l);
/// sum_i d_i(X_i u) + X_0 u
Expr apply(const DecomposedOperator& d, const Expr& u);

/// <A grad u, grad u>
Expr psi_a(const SecondOrderOperator& l, const Expr& u);

/// One-variable function with two derivatives, in extended precision.
struct ScalarFunction {
  std::string name;
  std::function<long double(long double)> f;
  std::function<long double(long double)> d1;
  std::function<long double(long double)> d2;
};

/// F given as an expression in one variable (index 0).
ScalarFunction scalar_function(const Expr& f, std::string name);

struct ChainRuleResult {
  double residual = 0;
  std::string method;  // "symbolic composition" or "finite differences"
  std::size_t points = 0;
};

/// max over samples in [-1,1]^dim of |L(F(u)) - F'(u) Lu - F''(u) Psi_A(u)|.
/// Expression F: composition by substitution when it stays in the ring,
/// otherwise the numeric path (central differences, h = 1e-4, one Richardson step).
ChainRuleResult chain_rule_residual(const SecondOrderOperator& l, const Expr& u, const Expr& f,
                                    const SampleSpec& samples = {});
ChainRuleResult chain_rule_residual(const SecondOrderOperator& l, const Expr& u, const ScalarFunction& f,
                                    const SampleSpec& samples = {});

struct NdReport {
  bool nondegenerate = false;
  std::vector<bool> per_point;
  std::string note;
};

/// A(x) has an entry with |value| > 1e-12 at every point.
NdReport check_nd(const SecondOrderOperator& l, const std::vector<std::vector<double>>& points);

/// max over sampled (g, x) in [-1,1] and bank functions u of
/// |L(u o tau_g)(x) - (Lu)(g.x)| / (1 + |(Lu)(g.x)|), by the exact chain rule.
double check_left_invariance(const SecondOrderOperator& l, const GroupLaw& g, const SampleSpec& samples = {});

AdjointOperator formal_adjoint(const SecondOrderOperator& l);

enum class Harmonicity { Harmonic, Subharmonic, Superharmonic, None };
std::string to_string(Harmonicity h);

struct Classification {
  Harmonicity kind = Harmonicity::None;
  bool exact_zero = false;  // Lu simplified to the zero expression
  std::size_t points = 0;
  double min_value = 0;
  double max_value = 0;
};

/// Sign of Lu on sampled points (tolerance 1e-10); "harmonic" needs Lu = 0 on samples.
Classification classify(const SecondOrderOperator& l, const Expr& u, const SampleSpec& samples = {});

/// Four conditions that force a function to be constant, each tested on samples:
/// (1) u constant, (2) X_0 u..X_n u vanish, (3) Psi_A(u) and X_0 u vanish,
/// (4) Lu and Psi_A(u) vanish.
struct ConstancyConditions {
  bool constant = false;
  bool fields_vanish = false;
  bool psi_and_drift_vanish = false;
  bool harmonic_and_psi_vanish = false;
};
ConstancyConditions constancy_conditions(const SecondOrderOperator& l, const Expr& u);

}  // namespace lieop
