#pragma once

#include "lieop/expr_matrix.hpp"

namespace lieop {

/// Coefficients low degree first.
using Polynomial = std::vector<Rational>;

/// det(lambda I - B), monic, by Faddeev-LeVerrier.
Polynomial characteristic_polynomial(const RationalMatrix& b);

/// Squarefree decomposition p = c * prod f_i^i (Yun); returns (f_i, i) with deg f_i > 0.
std::vector<std::pair<Polynomial, unsigned>> squarefree_decomposition(const Polynomial& p);

/// Entries of exp(t B) as expressions in the variable `t_var`.
struct SymbolicExponential {
  ExprMatrix entries;
  /// Some eigenvalue was irrational (outside the pure-imaginary-rational-pair
  /// case); the affected coefficients are rounded binary floats.
  bool numeric_coefficients = false;
};

/// exp(tB) = sum_k phi_k(t) B^k with phi_k the solutions of the scalar ODE
/// given by the characteristic polynomial, phi_k^{(i)}(0) = delta_ik.
SymbolicExponential symbolic_exp(const RationalMatrix& b, int t_var);

}  // namespace lieop
