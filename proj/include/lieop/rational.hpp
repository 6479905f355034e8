#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lieop {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline long double to_long_double(const Rational& r) { return r.convert_to<long double>(); }

/// Exact binary value of a finite double.
Rational exact_rational(double value);

/// Parses an unsigned decimal literal ("12", "0.25", "1.5e-3") exactly.
std::optional<Rational> parse_decimal(std::string_view text);

/// Best rational approximation with denominator <= max_denominator, if it is
/// within `tolerance` of `value`.
std::optional<Rational> rationalize(double value, std::int64_t max_denominator, double tolerance);

std::string to_string(const Rational& r);

/// Dense row-major matrix of exact rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  static RationalMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Rational trace() const;
  RationalMatrix transpose() const;
  bool is_symmetric() const;
  bool is_zero() const;

  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
  friend RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b);
  friend RationalMatrix operator-(const RationalMatrix& a);
  friend RationalMatrix operator*(const Rational& s, const RationalMatrix& a);
  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

std::string to_string(const RationalMatrix& m);

/// Rank by fraction-free (Bareiss) elimination after clearing row denominators.
std::size_t exact_rank(const RationalMatrix& m);

/// Inverse by Gauss-Jordan over the rationals; nullopt when singular.
std::optional<RationalMatrix> exact_inverse(const RationalMatrix& m);

}  // namespace lieop
