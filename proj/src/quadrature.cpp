#include "lieop/quadrature.hpp"

#include "lieop/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace lieop {

namespace {

GaussRule build_rule(std::size_t n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (static_cast<long double>(i) + 0.75L) /
                             (static_cast<long double>(n) + 0.5L));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        long double p2 = ((2.0L * k - 1) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    long double p0 = 1, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      long double p2 = ((2.0L * k - 1) * x * p1 - (k - 1.0L) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1;
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
    long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[i] = static_cast<double>(-x);
    rule.nodes[n - 1 - i] = static_cast<double>(x);
    rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("quadrature order must be positive");
  static std::mutex mu;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, std::size_t order) {
  return integrate_composite(f, a, b, 1, order);
}

double integrate_composite(const std::function<double(double)>& f, double a, double b, std::size_t panels,
                           std::size_t order) {
  const GaussRule& rule = gauss_legendre(order);
  const double width = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width, half = 0.5 * width;
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * s;
  }
  return total;
}

double integrate_box(const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
                     std::span<const double> hi, std::size_t order, std::size_t panels) {
  if (lo.size() != hi.size()) throw DimensionError("box bounds differ in length");
  const std::size_t dim = lo.size();
  if (dim == 0) return f({});
  const GaussRule& rule = gauss_legendre(order);
  // Per-axis node/weight lists.
  std::vector<std::vector<double>> xs(dim), ws(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const double width = (hi[d] - lo[d]) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = lo[d] + width * (static_cast<double>(p) + 0.5), half = 0.5 * width;
      for (std::size_t i = 0; i < order; ++i) {
        xs[d].push_back(mid + half * rule.nodes[i]);
        ws[d].push_back(half * rule.weights[i]);
      }
    }
  }
  const std::size_t m = xs[0].size();
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> point(dim);
  // Innermost sums first so partial sums stay comparable in magnitude.
  std::vector<double> partial(dim, 0.0);
  for (;;) {
    for (std::size_t d = 0; d < dim; ++d) point[d] = xs[d][idx[d]];
    partial[dim - 1] += ws[dim - 1][idx[dim - 1]] * f(point);
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++idx[d] < m) break;
      idx[d] = 0;
      if (d == 0) return partial[0];
      partial[d - 1] += ws[d - 1][idx[d - 1]] * partial[d];
      partial[d] = 0.0;
    }
  }
}

namespace {

Eigen::MatrixXd rule20(const std::function<Eigen::MatrixXd(double)>& f, double a, double b) {
  const GaussRule& rule = gauss_legendre(20);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Eigen::MatrixXd s = rule.weights[0] * f(mid + half * rule.nodes[0]);
  for (std::size_t i = 1; i < 20; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * s;
}

Eigen::MatrixXd adapt(const std::function<Eigen::MatrixXd(double)>& f, double a, double b, const Eigen::MatrixXd& whole,
                      double rtol, double atol, int depth) {
  const double m = 0.5 * (a + b);
  Eigen::MatrixXd left = rule20(f, a, m);
  Eigen::MatrixXd right = rule20(f, m, b);
  Eigen::MatrixXd both = left + right;
  const double err = (both - whole).norm();
  if (depth <= 0 || err <= atol || err <= rtol * both.norm()) return both;
  return adapt(f, a, m, left, rtol, atol, depth - 1) + adapt(f, m, b, right, rtol, atol, depth - 1);
}

}  // namespace

Eigen::MatrixXd integrate_adaptive(const std::function<Eigen::MatrixXd(double)>& f, double a, double b, double rtol,
                                   double atol, int max_depth) {
  return adapt(f, a, b, rule20(f, a, b), rtol, atol, max_depth);
}

}  // namespace lieop
