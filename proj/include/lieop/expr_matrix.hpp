#pragma once

#include "lieop/symbolic.hpp"

#include <Eigen/Dense>

#include <vector>

namespace lieop {

/// Row-major matrix of expressions.
using ExprMatrix = std::vector<std::vector<Expr>>;

ExprMatrix expr_matrix(const RationalMatrix& m);
ExprMatrix multiply(const ExprMatrix& a, const ExprMatrix& b);
std::vector<Expr> multiply(const ExprMatrix& a, const std::vector<Expr>& v);

/// Cofactor expansion memoized over column subsets; fine for n <= 8.
Expr determinant(const ExprMatrix& m);

/// J(i, j) = d exprs[i] / d var_{first_var + j}, j < count.
ExprMatrix jacobian(const std::vector<Expr>& exprs, int first_var, std::size_t count);

Eigen::MatrixXd evaluate(const ExprMatrix& m, std::span<const double> point);

std::vector<Expr> variables(int first, std::size_t count);

}  // namespace lieop
