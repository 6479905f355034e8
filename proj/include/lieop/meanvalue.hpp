#pragma once

// Mean-value representation u(x) = M(u)(x) - N(Lu)(x) for left-invariant
// operators, instantiated for the Laplacian on Euclidean balls.

#include "lieop/bump.hpp"
#include "lieop/group.hpp"
#include "lieop/operator.hpp"

#include <string>
#include <vector>

namespace lieop {

/// Boundary measure mu and volume measure nu on a ball of radius r around the
/// identity, both given as weighted nodes in R^n.
struct MeasurePair {
  std::size_t n = 0;
  double r = 0;
  std::string family;
  std::string quadrature;
  std::vector<std::vector<double>> sphere_nodes;
  std::vector<double> sphere_weights;
  std::vector<std::vector<double>> volume_nodes;
  std::vector<double> volume_weights;

  double mu_mass() const;
  double nu_mass() const;
};

struct BallQuadrature {
  /// n = 2: points on the circle; n = 3: Gauss nodes in cos(theta), 2x as many azimuths.
  std::size_t sphere = 0;  // 0 picks 256 (n = 2) or 16 (n = 3)
  std::size_t radial = 64;
};

/// Uniform normalized surface measure and the Green measure of the ball at its
/// center: (r - |y|)/2 for n = 1, log(r/|y|)/(2 pi) for n = 2,
/// (|y|^{2-n} - r^{2-n}) / ((n-2)|S^{n-1}|) for n = 3. Supports n <= 3.
MeasurePair laplacian_ball_measures(std::size_t n, double r, const BallQuadrature& q = {});

/// M(u)(x) = int u(x.y) dmu(y)
double M_op(const PointFunction& u, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x);
double M_op(const Expr& u, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x);
/// N(f)(x) = int f(x.y) dnu(y)
double N_op(const PointFunction& f, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x);
double N_op(const Expr& f, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x);

/// max over xs of |u(x) - M(u)(x) + N(Lu)(x)|. Only the Laplacian on an abelian
/// group with Laplacian ball measures is instantiated; anything else is a DomainError.
double representation_residual(const Expr& u, const SecondOrderOperator& l, const GroupLaw& g, const MeasurePair& mp,
                               const std::vector<std::vector<double>>& xs);

struct MassIdentity {
  double lhs = 0;  // int M(u) w over [-R, R]^dim
  double rhs = 0;  // int u w over the same box
  double residual = 0;
};

/// Both sides by composite Gauss-Legendre (`panels` per axis, 0 = 8 per unit of
/// length). The support box of u must lie in [-R + r, R - r]^dim.
MassIdentity mass_identity(const CompactFunction& u, const GroupLaw& g, const MeasurePair& mp, double big_r,
                           std::size_t order = 8, std::size_t panels = 0);
inline double mass_identity_residual(const CompactFunction& u, const GroupLaw& g, const MeasurePair& mp, double big_r,
                                     std::size_t order = 8, std::size_t panels = 0) {
  return mass_identity(u, g, mp, big_r, order, panels).residual;
}

}  // namespace lieop
