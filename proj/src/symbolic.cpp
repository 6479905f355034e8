#include "lieop/symbolic.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace lieop {

// ---------------------------------------------------------------------------
// VarSet / Affine

VarSet::VarSet(std::vector<std::string> names, std::optional<std::size_t> time_index)
    : names_(std::move(names)), time_index_(time_index) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw DomainError("duplicate variable name '" + n + "'");
    if (n.empty() || !std::isalpha(static_cast<unsigned char>(n[0])))
      throw DomainError("invalid variable name '" + n + "'");
  }
  if (time_index_ && *time_index_ >= names_.size()) throw DomainError("time index out of range");
}

std::optional<std::size_t> VarSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

VarSet VarSet::doubled() const {
  std::vector<std::string> out = names_;
  for (const auto& n : names_) out.push_back(n + "_r");
  return VarSet(std::move(out));
}

Affine Affine::variable(int var, Rational coefficient) {
  Affine a;
  if (coefficient != 0) a.terms.emplace_back(var, std::move(coefficient));
  return a;
}

Rational Affine::coefficient(int var) const {
  for (const auto& [v, c] : terms)
    if (v == var) return c;
  return 0;
}

Affine Affine::operator+(const Affine& other) const {
  Affine out;
  out.constant = constant + other.constant;
  std::size_t i = 0, j = 0;
  while (i < terms.size() || j < other.terms.size()) {
    if (j == other.terms.size() || (i < terms.size() && terms[i].first < other.terms[j].first)) {
      out.terms.push_back(terms[i++]);
    } else if (i == terms.size() || other.terms[j].first < terms[i].first) {
      out.terms.push_back(other.terms[j++]);
    } else {
      Rational c = terms[i].second + other.terms[j].second;
      if (c != 0) out.terms.emplace_back(terms[i].first, c);
      ++i;
      ++j;
    }
  }
  return out;
}

Affine Affine::scaled(const Rational& s) const {
  Affine out;
  if (s == 0) return out;
  out.constant = constant * s;
  out.terms = terms;
  for (auto& t : out.terms) t.second *= s;
  return out;
}

// ---------------------------------------------------------------------------
// Nodes

namespace detail {
struct Node {
  ExprKind kind = ExprKind::Constant;
  Rational value = 0;
  int var = -1;
  std::vector<Expr> args;
  unsigned exponent = 0;
  Affine affine;
  std::uint64_t hash = 0;
};
}  // namespace detail

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0x100000001b3ULL;
}

std::uint64_t hash_rational(const Rational& r) {
  return std::bit_cast<std::uint64_t>(to_double(r)) ^ (r.sign() < 0 ? 0x5555ULL : 0);
}

std::uint64_t hash_affine(const Affine& a) {
  std::uint64_t h = hash_rational(a.constant);
  for (const auto& [v, c] : a.terms) h = mix(mix(h, static_cast<std::uint64_t>(v)), hash_rational(c));
  return h;
}

int compare_rational(const Rational& a, const Rational& b) { return a < b ? -1 : (b < a ? 1 : 0); }

int compare_affine(const Affine& a, const Affine& b) {
  if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].first != b.terms[i].first) return a.terms[i].first < b.terms[i].first ? -1 : 1;
    if (int c = compare_rational(a.terms[i].second, b.terms[i].second)) return c;
  }
  return compare_rational(a.constant, b.constant);
}

int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::Constant: return 0;
    case ExprKind::Variable: return 1;
    case ExprKind::Power: return 2;
    case ExprKind::Product: return 3;
    case ExprKind::Exp: return 4;
    case ExprKind::Sin: return 5;
    case ExprKind::Cos: return 6;
    case ExprKind::Sum: return 7;
  }
  return 8;
}

}  // namespace

class ExprFactory {
 public:
  static Expr make(detail::Node node) {
    std::uint64_t h = static_cast<std::uint64_t>(node.kind) + 1;
    switch (node.kind) {
      case ExprKind::Constant: h = mix(h, hash_rational(node.value)); break;
      case ExprKind::Variable: h = mix(h, static_cast<std::uint64_t>(node.var)); break;
      case ExprKind::Power: h = mix(h, node.exponent); [[fallthrough]];
      case ExprKind::Sum:
      case ExprKind::Product:
        for (const auto& a : node.args) h = mix(h, a.hash());
        break;
      case ExprKind::Exp:
      case ExprKind::Sin:
      case ExprKind::Cos: h = mix(h, hash_affine(node.affine)); break;
    }
    node.hash = h;
    return Expr(std::make_shared<const detail::Node>(std::move(node)));
  }
  static Expr constant(const Rational& v) {
    detail::Node n;
    n.kind = ExprKind::Constant;
    n.value = v;
    return make(std::move(n));
  }
  static Expr raw(ExprKind kind, std::vector<Expr> args, unsigned exponent = 0) {
    detail::Node n;
    n.kind = kind;
    n.args = std::move(args);
    n.exponent = exponent;
    return make(std::move(n));
  }
  static Expr transcendental(ExprKind kind, const Affine& a) {
    detail::Node n;
    n.kind = kind;
    n.affine = a;
    return make(std::move(n));
  }
  static Expr var(int index) {
    detail::Node n;
    n.kind = ExprKind::Variable;
    n.var = index;
    return make(std::move(n));
  }
};

namespace {
const Expr& zero_expr() {
  static const Expr z = ExprFactory::constant(0);
  return z;
}
const Expr& one_expr() {
  static const Expr o = ExprFactory::constant(1);
  return o;
}
}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}
Expr::Expr(const Rational& value) : node_(ExprFactory::constant(value).node_) {}
Expr::Expr(long long value) : node_(ExprFactory::constant(Rational(value)).node_) {}

Expr Expr::variable(int index) {
  if (index < 0) throw DomainError("negative variable index");
  return ExprFactory::var(index);
}

Expr Expr::exp(const Affine& arg) {
  if (arg.is_zero()) return one_expr();
  return ExprFactory::transcendental(ExprKind::Exp, arg);
}
Expr Expr::sin(const Affine& arg) {
  if (arg.is_zero()) return zero_expr();
  return ExprFactory::transcendental(ExprKind::Sin, arg);
}
Expr Expr::cos(const Affine& arg) {
  if (arg.is_zero()) return one_expr();
  return ExprFactory::transcendental(ExprKind::Cos, arg);
}

namespace {
Affine require_affine(const Expr& arg, const char* fn) {
  auto a = as_affine(arg);
  if (!a) throw NonAffineError(std::string("non-affine argument to ") + fn);
  return *a;
}
}  // namespace

Expr Expr::exp(const Expr& arg) { return exp(require_affine(arg, "exp")); }
Expr Expr::sin(const Expr& arg) { return sin(require_affine(arg, "sin")); }
Expr Expr::cos(const Expr& arg) { return cos(require_affine(arg, "cos")); }

ExprKind Expr::kind() const { return node_->kind; }
bool Expr::is_zero() const { return node_->kind == ExprKind::Constant && node_->value == 0; }
bool Expr::is_one() const { return node_->kind == ExprKind::Constant && node_->value == 1; }
const Rational& Expr::constant_value() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
unsigned Expr::exponent() const { return node_->exponent; }
const Affine& Expr::affine() const { return node_->affine; }
std::uint64_t Expr::hash() const { return node_->hash; }

int compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return kind_rank(x.kind) < kind_rank(y.kind) ? -1 : 1;
  switch (x.kind) {
    case ExprKind::Constant: return compare_rational(x.value, y.value);
    case ExprKind::Variable: return x.var == y.var ? 0 : (x.var < y.var ? -1 : 1);
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos: return compare_affine(x.affine, y.affine);
    case ExprKind::Power:
      if (int c = compare(x.args[0], y.args[0])) return c;
      return x.exponent == y.exponent ? 0 : (x.exponent < y.exponent ? -1 : 1);
    case ExprKind::Sum:
    case ExprKind::Product: {
      if (x.hash == y.hash && x.args.size() == y.args.size()) {
        bool same = true;
        for (std::size_t i = 0; i < x.args.size() && same; ++i) same = compare(x.args[i], y.args[i]) == 0;
        if (same) return 0;
      }
      const std::size_t n = std::min(x.args.size(), y.args.size());
      for (std::size_t i = 0; i < n; ++i)
        if (int c = compare(x.args[i], y.args[i])) return c;
      if (x.args.size() != y.args.size()) return x.args.size() < y.args.size() ? -1 : 1;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Canonicalizing constructors

namespace {

// term = coefficient * rest; rest has no leading constant.
std::pair<Rational, Expr> split_coefficient(const Expr& term) {
  if (term.kind() == ExprKind::Product && term.args().front().is_constant()) {
    const auto& a = term.args();
    if (a.size() == 2) return {a[0].constant_value(), a[1]};
    return {a[0].constant_value(), ExprFactory::raw(ExprKind::Product, std::vector<Expr>(a.begin() + 1, a.end()))};
  }
  return {Rational(1), term};
}

Expr scale_term(const Expr& rest, const Rational& coefficient) {
  if (coefficient == 1) return rest;
  std::vector<Expr> factors{Expr(coefficient)};
  if (rest.kind() == ExprKind::Product)
    factors.insert(factors.end(), rest.args().begin(), rest.args().end());
  else
    factors.push_back(rest);
  return ExprFactory::raw(ExprKind::Product, std::move(factors));
}

void flatten(const Expr& e, ExprKind kind, std::vector<Expr>& out) {
  if (e.kind() == kind) {
    for (const auto& a : e.args()) flatten(a, kind, out);
  } else {
    out.push_back(e);
  }
}

Rational rational_pow(const Rational& r, unsigned k) {
  return Rational(boost::multiprecision::pow(numerator(r), k), boost::multiprecision::pow(denominator(r), k));
}

}  // namespace

Expr Expr::sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  for (const auto& t : terms) flatten(t, ExprKind::Sum, flat);
  Rational constant = 0;
  std::vector<std::pair<Expr, Rational>> parts;
  for (const auto& t : flat) {
    if (t.is_constant()) {
      constant += t.constant_value();
    } else {
      auto [c, rest] = split_coefficient(t);
      parts.emplace_back(std::move(rest), std::move(c));
    }
  }
  std::stable_sort(parts.begin(), parts.end(),
                   [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
  std::vector<Expr> out;
  for (std::size_t i = 0; i < parts.size();) {
    std::size_t j = i + 1;
    Rational c = parts[i].second;
    while (j < parts.size() && compare(parts[j].first, parts[i].first) == 0) c += parts[j++].second;
    if (c != 0) out.push_back(scale_term(parts[i].first, c));
    i = j;
  }
  if (constant != 0) out.push_back(Expr(constant));
  if (out.empty()) return zero_expr();
  if (out.size() == 1) return out.front();
  return ExprFactory::raw(ExprKind::Sum, std::move(out));
}

Expr Expr::product(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  for (const auto& f : factors) flatten(f, ExprKind::Product, flat);
  Rational coefficient = 1;
  Affine exponent_sum;
  bool has_exp = false;
  std::vector<std::pair<Expr, unsigned>> bases;
  for (const auto& f : flat) {
    switch (f.kind()) {
      case ExprKind::Constant: coefficient *= f.constant_value(); break;
      case ExprKind::Exp:
        exponent_sum = exponent_sum + f.affine();
        has_exp = true;
        break;
      case ExprKind::Power: bases.emplace_back(f.args()[0], f.exponent()); break;
      default: bases.emplace_back(f, 1u); break;
    }
  }
  if (coefficient == 0) return zero_expr();
  std::stable_sort(bases.begin(), bases.end(),
                   [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
  std::vector<Expr> out;
  for (std::size_t i = 0; i < bases.size();) {
    std::size_t j = i + 1;
    unsigned k = bases[i].second;
    while (j < bases.size() && compare(bases[j].first, bases[i].first) == 0) k += bases[j++].second;
    out.push_back(k == 1 ? bases[i].first : ExprFactory::raw(ExprKind::Power, {bases[i].first}, k));
    i = j;
  }
  if (has_exp && !exponent_sum.is_zero()) out.push_back(Expr::exp(exponent_sum));
  std::stable_sort(out.begin(), out.end(), [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
  if (out.empty()) return Expr(coefficient);
  if (coefficient == 1 && out.size() == 1) return out.front();
  if (coefficient != 1) out.insert(out.begin(), Expr(coefficient));
  return ExprFactory::raw(ExprKind::Product, std::move(out));
}

Expr pow(const Expr& base, unsigned exponent) {
  if (exponent == 0) return Expr(1);
  if (exponent == 1) return base;
  switch (base.kind()) {
    case ExprKind::Constant: return Expr(rational_pow(base.constant_value(), exponent));
    case ExprKind::Power: return pow(base.args()[0], base.exponent() * exponent);
    case ExprKind::Exp: return Expr::exp(base.affine().scaled(Rational(exponent)));
    case ExprKind::Product: {
      std::vector<Expr> f;
      for (const auto& a : base.args()) f.push_back(pow(a, exponent));
      return Expr::product(std::move(f));
    }
    default: return ExprFactory::raw(ExprKind::Power, {base}, exponent);
  }
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr::sum({a, b});
}
Expr operator-(const Expr& a) { return Expr::product({Expr(-1), a}); }
Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  return Expr::sum({a, -b});
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return Expr::product({a, b});
}
Expr operator/(const Expr& a, const Rational& divisor) {
  if (divisor == 0) throw DomainError("division by zero");
  return a * Expr(Rational(1) / divisor);
}

// ---------------------------------------------------------------------------
// Structure queries

int max_var_index(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant: return -1;
    case ExprKind::Variable: return e.var_index();
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos: return e.affine().terms.empty() ? -1 : e.affine().terms.back().first;
    default: {
      int m = -1;
      for (const auto& a : e.args()) m = std::max(m, max_var_index(a));
      return m;
    }
  }
}

std::optional<Affine> as_affine(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant: {
      Affine a;
      a.constant = e.constant_value();
      return a;
    }
    case ExprKind::Variable: return Affine::variable(e.var_index());
    case ExprKind::Sum: {
      Affine acc;
      for (const auto& t : e.args()) {
        auto a = as_affine(t);
        if (!a) return std::nullopt;
        acc = acc + *a;
      }
      return acc;
    }
    case ExprKind::Product: {
      Rational c = 1;
      std::optional<Affine> inner;
      for (const auto& f : e.args()) {
        if (f.is_constant()) {
          c *= f.constant_value();
          continue;
        }
        if (inner) return std::nullopt;
        inner = as_affine(f);
        if (!inner) return std::nullopt;
      }
      if (!inner) {
        Affine a;
        a.constant = c;
        return a;
      }
      return inner->scaled(c);
    }
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Differentiation

Expr differentiate(const Expr& e, int var) {
  switch (e.kind()) {
    case ExprKind::Constant: return Expr();
    case ExprKind::Variable: return e.var_index() == var ? Expr(1) : Expr();
    case ExprKind::Sum: {
      std::vector<Expr> d;
      for (const auto& a : e.args()) {
        Expr da = differentiate(a, var);
        if (!da.is_zero()) d.push_back(std::move(da));
      }
      return Expr::sum(std::move(d));
    }
    case ExprKind::Product: {
      const auto& f = e.args();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < f.size(); ++i) {
        Expr di = differentiate(f[i], var);
        if (di.is_zero()) continue;
        std::vector<Expr> factors;
        factors.reserve(f.size());
        for (std::size_t j = 0; j < f.size(); ++j) factors.push_back(i == j ? di : f[j]);
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case ExprKind::Power: {
      Expr db = differentiate(e.args()[0], var);
      if (db.is_zero()) return Expr();
      return Expr::product({Expr(static_cast<long long>(e.exponent())), pow(e.args()[0], e.exponent() - 1), db});
    }
    case ExprKind::Exp: {
      Rational c = e.affine().coefficient(var);
      if (c == 0) return Expr();
      return Expr(c) * e;
    }
    case ExprKind::Sin: {
      Rational c = e.affine().coefficient(var);
      if (c == 0) return Expr();
      return Expr(c) * Expr::cos(e.affine());
    }
    case ExprKind::Cos: {
      Rational c = e.affine().coefficient(var);
      if (c == 0) return Expr();
      return Expr(-c) * Expr::sin(e.affine());
    }
  }
  return Expr();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <typename T>
T ipow(T base, unsigned k) {
  T result = 1;
  while (k) {
    if (k & 1u) result *= base;
    base *= base;
    k >>= 1u;
  }
  return result;
}

template <typename T>
T eval_affine(const Affine& a, std::span<const T> point) {
  T s = static_cast<T>(a.constant.template convert_to<long double>());
  for (const auto& [v, c] : a.terms) {
    if (static_cast<std::size_t>(v) >= point.size()) throw DimensionError("evaluation point too short");
    s += static_cast<T>(c.template convert_to<long double>()) * point[v];
  }
  return s;
}

std::optional<Rational> eval_affine_exact(const Affine& a, std::span<const Rational> point) {
  Rational s = a.constant;
  for (const auto& [v, c] : a.terms) {
    if (static_cast<std::size_t>(v) >= point.size()) throw DimensionError("evaluation point too short");
    s += c * point[v];
  }
  return s;
}

}  // namespace

template <typename T>
T evaluate_as(const Expr& e, std::span<const T> point) {
  switch (e.kind()) {
    case ExprKind::Constant: return static_cast<T>(e.constant_value().template convert_to<long double>());
    case ExprKind::Variable:
      if (static_cast<std::size_t>(e.var_index()) >= point.size())
        throw DimensionError("evaluation point too short");
      return point[e.var_index()];
    case ExprKind::Sum: {
      T s = 0;
      for (const auto& a : e.args()) s += evaluate_as<T>(a, point);
      return s;
    }
    case ExprKind::Product: {
      T p = 1;
      for (const auto& a : e.args()) p *= evaluate_as<T>(a, point);
      return p;
    }
    case ExprKind::Power: return ipow(evaluate_as<T>(e.args()[0], point), e.exponent());
    case ExprKind::Exp: return std::exp(eval_affine<T>(e.affine(), point));
    case ExprKind::Sin: return std::sin(eval_affine<T>(e.affine(), point));
    case ExprKind::Cos: return std::cos(eval_affine<T>(e.affine(), point));
  }
  return T(0);
}

template double evaluate_as<double>(const Expr&, std::span<const double>);
template long double evaluate_as<long double>(const Expr&, std::span<const long double>);

double evaluate(const Expr& e, std::span<const double> point) { return evaluate_as<double>(e, point); }

std::optional<Rational> evaluate_exact(const Expr& e, std::span<const Rational> point) {
  switch (e.kind()) {
    case ExprKind::Constant: return e.constant_value();
    case ExprKind::Variable:
      if (static_cast<std::size_t>(e.var_index()) >= point.size())
        throw DimensionError("evaluation point too short");
      return point[e.var_index()];
    case ExprKind::Sum: {
      Rational s = 0;
      for (const auto& a : e.args()) {
        auto v = evaluate_exact(a, point);
        if (!v) return std::nullopt;
        s += *v;
      }
      return s;
    }
    case ExprKind::Product: {
      Rational p = 1;
      for (const auto& a : e.args()) {
        auto v = evaluate_exact(a, point);
        if (!v) return std::nullopt;
        p *= *v;
      }
      return p;
    }
    case ExprKind::Power: {
      auto v = evaluate_exact(e.args()[0], point);
      if (!v) return std::nullopt;
      return rational_pow(*v, e.exponent());
    }
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos: {
      auto arg = eval_affine_exact(e.affine(), point);
      if (*arg != 0) return std::nullopt;
      return e.kind() == ExprKind::Sin ? Rational(0) : Rational(1);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Substitution

Expr substitute(const Expr& e, std::span<const Expr> replacements) {
  auto rep = [&](int v) -> const Expr& {
    if (static_cast<std::size_t>(v) >= replacements.size())
      throw DimensionError("substitution does not cover variable " + std::to_string(v));
    return replacements[v];
  };
  switch (e.kind()) {
    case ExprKind::Constant: return e;
    case ExprKind::Variable: return rep(e.var_index());
    case ExprKind::Sum:
    case ExprKind::Product: {
      std::vector<Expr> a;
      a.reserve(e.args().size());
      for (const auto& x : e.args()) a.push_back(substitute(x, replacements));
      return e.kind() == ExprKind::Sum ? Expr::sum(std::move(a)) : Expr::product(std::move(a));
    }
    case ExprKind::Power: return pow(substitute(e.args()[0], replacements), e.exponent());
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos: {
      Expr arg(e.affine().constant);
      for (const auto& [v, c] : e.affine().terms) arg = arg + Expr(c) * rep(v);
      auto a = as_affine(arg);
      if (!a) throw NonAffineError("substitution makes a transcendental argument non-affine");
      if (e.kind() == ExprKind::Exp) return Expr::exp(*a);
      if (e.kind() == ExprKind::Sin) return Expr::sin(*a);
      return Expr::cos(*a);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string var_name(int v, const VarSet& vars) {
  if (static_cast<std::size_t>(v) < vars.size()) return vars.name(v);
  return "v" + std::to_string(v);
}

std::string affine_string(const Affine& a, const VarSet& vars) {
  std::string out;
  bool first = true;
  for (const auto& [v, c] : a.terms) {
    if (first) {
      out += to_string(c);
    } else {
      out += c < 0 ? " - " : " + ";
      out += to_string(Rational(abs(c)));
    }
    out += "*" + var_name(v, vars);
    first = false;
  }
  if (a.constant != 0 || first) {
    if (first) {
      out += to_string(a.constant);
    } else {
      out += a.constant < 0 ? " - " : " + ";
      out += to_string(Rational(abs(a.constant)));
    }
  }
  return out;
}

std::string print(const Expr& e, const VarSet& vars);

std::string print_factor(const Expr& f, const VarSet& vars) {
  if (f.kind() == ExprKind::Sum) return "(" + print(f, vars) + ")";
  if (f.is_constant() && (f.constant_value() < 0 || denominator(f.constant_value()) != 1))
    return "(" + print(f, vars) + ")";
  return print(f, vars);
}

bool negative_term(const Expr& t) {
  if (t.is_constant()) return t.constant_value() < 0;
  return t.kind() == ExprKind::Product && t.args().front().is_constant() && t.args().front().constant_value() < 0;
}

std::string print(const Expr& e, const VarSet& vars) {
  switch (e.kind()) {
    case ExprKind::Constant: return to_string(e.constant_value());
    case ExprKind::Variable: return var_name(e.var_index(), vars);
    case ExprKind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& t : e.args()) {
        if (first) {
          out += print(t, vars);
        } else if (negative_term(t)) {
          out += " - " + print(-t, vars);
        } else {
          out += " + " + print(t, vars);
        }
        first = false;
      }
      return out;
    }
    case ExprKind::Product: {
      std::string out;
      const auto& f = e.args();
      std::size_t start = 0;
      if (f.front().is_constant()) {
        const Rational& c = f.front().constant_value();
        if (c == -1) {
          out = "-";
        } else {
          out = to_string(c) + "*";
        }
        start = 1;
      }
      for (std::size_t i = start; i < f.size(); ++i) {
        if (i > start) out += "*";
        out += print_factor(f[i], vars);
      }
      return out;
    }
    case ExprKind::Power: {
      const Expr& b = e.args()[0];
      std::string base = b.kind() == ExprKind::Variable || b.kind() == ExprKind::Exp || b.kind() == ExprKind::Sin ||
                                 b.kind() == ExprKind::Cos
                             ? print(b, vars)
                             : "(" + print(b, vars) + ")";
      return base + "^" + std::to_string(e.exponent());
    }
    case ExprKind::Exp: return "exp(" + affine_string(e.affine(), vars) + ")";
    case ExprKind::Sin: return "sin(" + affine_string(e.affine(), vars) + ")";
    case ExprKind::Cos: return "cos(" + affine_string(e.affine(), vars) + ")";
  }
  return "?";
}

}  // namespace

std::string to_string(const Expr& e, const VarSet& vars) { return print(e, vars); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VarSet& vars) : s_(text), vars_(vars) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::optional<std::size_t> at = std::nullopt) const {
    throw ParseError(msg, at.value_or(pos_));
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else {
        skip_ws();
        std::size_t at = pos_;
        if (!accept('/')) return e;
        Expr d = unary();
        if (!d.is_constant()) fail("division by a non-constant expression", at);
        if (d.is_zero()) fail("division by zero", at);
        e = e / d.constant_value();
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    skip_ws();
    std::size_t at = pos_;
    if (!accept('^')) return base;
    Expr ex = unary();
    if (!ex.is_constant() || denominator(ex.constant_value()) != 1 || ex.constant_value() < 0)
      fail("negative or fractional power", at);
    if (ex.constant_value() > 4096) fail("power too large", at);
    return pow(base, ex.constant_value().convert_to<unsigned>());
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    auto value = parse_decimal(s_.substr(start, pos_ - start));
    if (!value) fail("malformed number", start);
    return Expr(*value);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string name(s_.substr(start, pos_ - start));
    if (name == "exp" || name == "sin" || name == "cos") {
      if (!accept('(')) fail("expected '(' after " + name);
      std::size_t arg_at = pos_;
      Expr arg = expression();
      if (!accept(')')) fail("expected ')'");
      auto a = as_affine(arg);
      if (!a) fail("non-affine argument to " + name, arg_at);
      if (name == "exp") return Expr::exp(*a);
      if (name == "sin") return Expr::sin(*a);
      return Expr::cos(*a);
    }
    auto idx = vars_.index_of(name);
    if (!idx) fail("unknown variable '" + name + "'", start);
    return Expr::variable(static_cast<int>(*idx));
  }

  std::string_view s_;
  const VarSet& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const VarSet& vars) { return Parser(text, vars).run(); }

// ---------------------------------------------------------------------------
// Identity testing

bool equal_on_samples(const Expr& a, const Expr& b, std::size_t dim, const SampleSpec& samples,
                      const Tolerance& tol) {
  CompiledExpr ca(a), cb(b);
  for (const auto& p : sample_points(dim, samples)) {
    double va = ca(p);
    double vb = cb(p);
    if (!(std::abs(va - vb) <= tol.atol + tol.rtol * std::abs(va))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Compiled evaluation

CompiledExpr::CompiledExpr(const Expr& e) {
  int depth = 0;
  emit(e, depth);
}

void CompiledExpr::emit(const Expr& e, int& depth) {
  auto push = [&](Instr in) {
    program_.push_back(in);
    ++depth;
    max_depth_ = std::max(max_depth_, depth);
  };
  switch (e.kind()) {
    case ExprKind::Constant:
      push({Op::Const, 0, to_double(e.constant_value()), to_long_double(e.constant_value())});
      return;
    case ExprKind::Variable: push({Op::Var, e.var_index(), 0.0, 0.0L}); return;
    case ExprKind::Sum:
    case ExprKind::Product: {
      for (const auto& a : e.args()) emit(a, depth);
      const int n = static_cast<int>(e.args().size());
      program_.push_back({e.kind() == ExprKind::Sum ? Op::Add : Op::Mul, n, 0.0, 0.0L});
      depth -= n - 1;
      return;
    }
    case ExprKind::Power:
      emit(e.args()[0], depth);
      program_.push_back({Op::Pow, static_cast<int>(e.exponent()), 0.0, 0.0L});
      return;
    case ExprKind::Exp:
    case ExprKind::Sin:
    case ExprKind::Cos: {
      LinearForm f{to_long_double(e.affine().constant), {}};
      for (const auto& [v, c] : e.affine().terms) f.terms.emplace_back(v, to_long_double(c));
      forms_.push_back(std::move(f));
      Op op = e.kind() == ExprKind::Exp ? Op::Exp : (e.kind() == ExprKind::Sin ? Op::Sin : Op::Cos);
      push({op, static_cast<int>(forms_.size() - 1), 0.0, 0.0L});
      return;
    }
  }
}

template <typename T>
T CompiledExpr::run(std::span<const T> point) const {
  if (program_.empty()) return T(0);
  T small[48];
  std::vector<T> big;
  T* stack = small;
  if (max_depth_ > 48) {
    big.resize(static_cast<std::size_t>(max_depth_));
    stack = big.data();
  }
  int sp = 0;
  auto var = [&](int v) -> T {
    if (static_cast<std::size_t>(v) >= point.size()) throw DimensionError("evaluation point too short");
    return point[v];
  };
  auto form = [&](int idx) -> T {
    const auto& f = forms_[idx];
    T s = static_cast<T>(f.constant);
    for (const auto& [v, c] : f.terms) s += static_cast<T>(c) * var(v);
    return s;
  };
  for (const auto& in : program_) {
    switch (in.op) {
      case Op::Const: stack[sp++] = std::is_same_v<T, double> ? static_cast<T>(in.value) : static_cast<T>(in.value_ld); break;
      case Op::Var: stack[sp++] = var(in.arg); break;
      case Op::Add: {
        T s = 0;
        for (int k = sp - in.arg; k < sp; ++k) s += stack[k];
        sp -= in.arg;
        stack[sp++] = s;
        break;
      }
      case Op::Mul: {
        T p = 1;
        for (int k = sp - in.arg; k < sp; ++k) p *= stack[k];
        sp -= in.arg;
        stack[sp++] = p;
        break;
      }
      case Op::Pow: stack[sp - 1] = ipow(stack[sp - 1], static_cast<unsigned>(in.arg)); break;
      case Op::Exp: stack[sp++] = std::exp(form(in.arg)); break;
      case Op::Sin: stack[sp++] = std::sin(form(in.arg)); break;
      case Op::Cos: stack[sp++] = std::cos(form(in.arg)); break;
    }
  }
  return stack[0];
}

template double CompiledExpr::run<double>(std::span<const double>) const;
template long double CompiledExpr::run<long double>(std::span<const long double>) const;

}  // namespace lieop
