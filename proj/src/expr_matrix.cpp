#include "lieop/expr_matrix.hpp"

#include <map>

namespace lieop {

ExprMatrix expr_matrix(const RationalMatrix& m) {
  ExprMatrix out(m.rows(), std::vector<Expr>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = Expr(m(i, j));
  return out;
}

ExprMatrix multiply(const ExprMatrix& a, const ExprMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
  ExprMatrix out(n, std::vector<Expr>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) throw DimensionError("matrix product shape mismatch");
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<Expr> terms;
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) terms.push_back(a[i][l] * b[l][j]);
      out[i][j] = Expr::sum(std::move(terms));
    }
  }
  return out;
}

std::vector<Expr> multiply(const ExprMatrix& a, const std::vector<Expr>& v) {
  std::vector<Expr> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != v.size()) throw DimensionError("matrix-vector shape mismatch");
    std::vector<Expr> terms;
    for (std::size_t l = 0; l < v.size(); ++l)
      if (!a[i][l].is_zero() && !v[l].is_zero()) terms.push_back(a[i][l] * v[l]);
    out[i] = Expr::sum(std::move(terms));
  }
  return out;
}

namespace {

Expr minor_det(const ExprMatrix& m, std::size_t row, unsigned mask, std::map<std::pair<std::size_t, unsigned>, Expr>& memo) {
  const std::size_t n = m.size();
  if (row == n) return Expr(1);
  auto key = std::make_pair(row, mask);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::vector<Expr> terms;
  int sign = 1;
  for (std::size_t c = 0; c < n; ++c) {
    if (mask & (1u << c)) continue;
    if (!m[row][c].is_zero()) {
      Expr sub = minor_det(m, row + 1, mask | (1u << c), memo);
      if (!sub.is_zero()) terms.push_back(sign > 0 ? m[row][c] * sub : -(m[row][c] * sub));
    }
    sign = -sign;
  }
  Expr d = Expr::sum(std::move(terms));
  memo.emplace(key, d);
  return d;
}

}  // namespace

Expr determinant(const ExprMatrix& m) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw DimensionError("determinant of a non-square matrix");
  if (n > 16) throw DimensionError("determinant: dimension too large");
  std::map<std::pair<std::size_t, unsigned>, Expr> memo;
  return minor_det(m, 0, 0u, memo);
}

ExprMatrix jacobian(const std::vector<Expr>& exprs, int first_var, std::size_t count) {
  ExprMatrix j(exprs.size(), std::vector<Expr>(count));
  for (std::size_t i = 0; i < exprs.size(); ++i)
    for (std::size_t k = 0; k < count; ++k) j[i][k] = differentiate(exprs[i], first_var + static_cast<int>(k));
  return j;
}

Eigen::MatrixXd evaluate(const ExprMatrix& m, std::span<const double> point) {
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = evaluate(m[i][j], point);
  return out;
}

std::vector<Expr> variables(int first, std::size_t count) {
  std::vector<Expr> v;
  for (std::size_t i = 0; i < count; ++i) v.push_back(Expr::variable(first + static_cast<int>(i)));
  return v;
}

}  // namespace lieop
