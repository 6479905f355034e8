#pragma once

#include "lieop/rational.hpp"

#include <Eigen/Dense>

namespace lieop {

Eigen::MatrixXd to_eigen(const RationalMatrix& m);

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Number of singular values above tol * max(1, largest singular value).
std::size_t numeric_rank(const Eigen::MatrixXd& m, double tol = 1e-9);

double min_eigenvalue_symmetric(const Eigen::MatrixXd& m);
double max_eigenvalue_symmetric(const Eigen::MatrixXd& m);

/// Largest entrywise |a - b| / (atol + rtol |b|); <= 1 means within tolerance.
double scaled_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double atol, double rtol);

}  // namespace lieop
