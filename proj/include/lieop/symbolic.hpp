#pragma once

// A small differential ring of scalar expressions: rational constants,
// variables, sums, products, non-negative integer powers and exp/sin/cos of
// affine forms. Expressions are immutable and cheap to copy.

#include "lieop/errors.hpp"
#include "lieop/rational.hpp"
#include "lieop/sampling.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lieop {

/// Ordered variable names. Indices into a VarSet are the variable identities
/// used by Expr.
class VarSet {
 public:
  VarSet() = default;
  explicit VarSet(std::vector<std::string> names, std::optional<std::size_t> time_index = std::nullopt);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<std::size_t> time_index() const { return time_index_; }

  /// Names for a 2n-variable product space: the names themselves, then `<name>_r`.
  VarSet doubled() const;

  friend bool operator==(const VarSet&, const VarSet&) = default;

 private:
  std::vector<std::string> names_;
  std::optional<std::size_t> time_index_;
};

/// c0 + sum_i c_i * x_{v_i}, terms sorted by variable with nonzero coefficients.
struct Affine {
  Rational constant = 0;
  std::vector<std::pair<int, Rational>> terms;

  static Affine variable(int var, Rational coefficient = 1);
  Rational coefficient(int var) const;
  bool is_constant() const { return terms.empty(); }
  bool is_zero() const { return terms.empty() && constant == 0; }
  Affine operator+(const Affine& other) const;
  Affine scaled(const Rational& s) const;
  friend bool operator==(const Affine&, const Affine&) = default;
};

enum class ExprKind : std::uint8_t { Constant, Variable, Sum, Product, Power, Exp, Sin, Cos };

namespace detail {
struct Node;
}

class Expr {
 public:
  Expr();  // zero
  Expr(const Rational& value);  // NOLINT(google-explicit-constructor)
  Expr(long long value);        // NOLINT(google-explicit-constructor)
  Expr(int value) : Expr(static_cast<long long>(value)) {}  // NOLINT(google-explicit-constructor)

  static Expr variable(int index);
  static Expr exp(const Affine& arg);
  static Expr sin(const Affine& arg);
  static Expr cos(const Affine& arg);
  /// Throws NonAffineError unless `arg` is affine.
  static Expr exp(const Expr& arg);
  static Expr sin(const Expr& arg);
  static Expr cos(const Expr& arg);

  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);

  ExprKind kind() const;
  bool is_constant() const { return kind() == ExprKind::Constant; }
  bool is_zero() const;
  bool is_one() const;
  const Rational& constant_value() const;  // Constant only
  int var_index() const;                   // Variable only
  const std::vector<Expr>& args() const;   // Sum, Product, Power (base)
  unsigned exponent() const;               // Power only
  const Affine& affine() const;            // Exp, Sin, Cos
  std::uint64_t hash() const;

  /// Structural total order; 0 iff structurally identical.
  friend int compare(const Expr& a, const Expr& b);
  friend bool identical(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Rational& divisor);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  friend struct detail::Node;
  friend class ExprFactory;
  std::shared_ptr<const detail::Node> node_;
};

Expr pow(const Expr& base, unsigned exponent);

/// Largest variable index referenced, or -1 for constants.
int max_var_index(const Expr& e);

std::optional<Affine> as_affine(const Expr& e);

Expr differentiate(const Expr& e, int var);

template <typename T>
T evaluate_as(const Expr& e, std::span<const T> point);

double evaluate(const Expr& e, std::span<const double> point);
inline double evaluate(const Expr& e, const std::vector<double>& point) {
  return evaluate(e, std::span<const double>(point));
}

/// Exact value when every exp/sin/cos argument vanishes at `point`.
std::optional<Rational> evaluate_exact(const Expr& e, std::span<const Rational> point);

/// Replaces variable i by replacements[i]. Throws NonAffineError when an
/// exp/sin/cos argument stops being affine.
Expr substitute(const Expr& e, std::span<const Expr> replacements);

std::string to_string(const Expr& e, const VarSet& vars);

/// Grammar: + - * / ^, unary minus, parentheses, exp/sin/cos calls, decimal
/// and rational literals, identifiers [a-zA-Z][a-zA-Z0-9_]*. Division only by
/// constants; powers must be non-negative integers.
Expr parse(std::string_view text, const VarSet& vars);

struct Tolerance {
  double atol = 1e-10;
  double rtol = 1e-9;
};

/// Pointwise comparison at pseudo-random points of [lo, hi]^dim.
bool equal_on_samples(const Expr& a, const Expr& b, std::size_t dim, const SampleSpec& samples = {},
                      const Tolerance& tol = {});

/// Flattened postfix program for fast repeated evaluation.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  double operator()(std::span<const double> point) const { return run<double>(point); }
  long double eval_ld(std::span<const long double> point) const { return run<long double>(point); }

 private:
  enum class Op : std::uint8_t { Const, Var, Add, Mul, Pow, Exp, Sin, Cos };
  struct Instr {
    Op op;
    int arg;
    double value;
    long double value_ld;
  };
  struct LinearForm {
    long double constant;
    std::vector<std::pair<int, long double>> terms;
  };
  template <typename T>
  T run(std::span<const T> point) const;
  void emit(const Expr& e, int& depth);

  std::vector<Instr> program_;
  std::vector<LinearForm> forms_;
  int max_depth_ = 0;
};

}  // namespace lieop
