#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace lieop {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached; nodes by Newton iteration on P_n in extended precision.
const GaussRule& gauss_legendre(std::size_t n);

double integrate(const std::function<double(double)>& f, double a, double b, std::size_t order = 32);

/// `panels` equal subintervals, each with an `order`-point rule.
double integrate_composite(const std::function<double(double)>& f, double a, double b, std::size_t panels,
                           std::size_t order);

/// Tensor product rule over the box [lo, hi]; `panels` equal subintervals per axis.
double integrate_box(const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
                     std::span<const double> hi, std::size_t order, std::size_t panels = 1);

/// Adaptive bisection with a 20-point rule; accepts a panel when the two
/// halves agree with the whole to rtol (Frobenius norm) or atol.
Eigen::MatrixXd integrate_adaptive(const std::function<Eigen::MatrixXd(double)>& f, double a, double b,
                                   double rtol = 1e-13, double atol = 1e-300, int max_depth = 40);

}  // namespace lieop
