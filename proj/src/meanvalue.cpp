#include "lieop/meanvalue.hpp"

#include "lieop/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace lieop {

double MeasurePair::mu_mass() const { return std::accumulate(sphere_weights.begin(), sphere_weights.end(), 0.0); }
double MeasurePair::nu_mass() const { return std::accumulate(volume_weights.begin(), volume_weights.end(), 0.0); }

namespace {

constexpr double kPi = std::numbers::pi;

// Unit sphere nodes with weights summing to 1.
void sphere_rule(std::size_t n, std::size_t count, MeasurePair& mp) {
  if (n == 1) {
    mp.sphere_nodes = {{-1.0}, {1.0}};
    mp.sphere_weights = {0.5, 0.5};
    mp.quadrature = "two points";
  } else if (n == 2) {
    if (count == 0) count = 256;
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2 * kPi * static_cast<double>(k) / static_cast<double>(count);
      mp.sphere_nodes.push_back({std::cos(a), std::sin(a)});
      mp.sphere_weights.push_back(1.0 / static_cast<double>(count));
    }
    mp.quadrature = "trapezoid on the circle, " + std::to_string(count) + " nodes";
  } else {
    if (count == 0) count = 16;
    const auto& gl = gauss_legendre(count);
    const std::size_t az = 2 * count;
    for (std::size_t i = 0; i < count; ++i) {
      const double z = gl.nodes[i], s = std::sqrt(1 - z * z);
      for (std::size_t k = 0; k < az; ++k) {
        const double a = 2 * kPi * static_cast<double>(k) / static_cast<double>(az);
        mp.sphere_nodes.push_back({s * std::cos(a), s * std::sin(a), z});
        mp.sphere_weights.push_back(gl.weights[i] / (2 * static_cast<double>(az)));
      }
    }
    mp.quadrature = "product Gauss on the sphere, " + std::to_string(count) + " x " + std::to_string(az) + " nodes";
  }
}

double sphere_area(std::size_t n) { return n == 1 ? 2.0 : n == 2 ? 2 * kPi : 4 * kPi; }

}  // namespace

MeasurePair laplacian_ball_measures(std::size_t n, double r, const BallQuadrature& q) {
  if (n == 0 || n > 3) throw DomainError("Laplacian ball measures are available for n = 1, 2, 3");
  if (!(r > 0)) throw DomainError("ball radius must be positive");
  if (q.radial == 0) throw DomainError("need at least one radial node");
  MeasurePair mp;
  mp.n = n;
  mp.r = r;
  mp.family = "laplacian_ball";
  sphere_rule(n, q.sphere, mp);
  const auto& gl = gauss_legendre(q.radial);
  const double area = sphere_area(n);
  // radial rule for int_0^r g(rho) rho^{n-1} d rho, times |S^{n-1}| and the sphere weights
  std::vector<double> rho, rw;
  for (std::size_t i = 0; i < q.radial; ++i) {
    const double s = (gl.nodes[i] + 1) / 2;
    if (n == 2) {
      // rho = r s^4 tames the log singularity of the Green density at the center
      const double p = r * std::pow(s, 4);
      rho.push_back(p);
      rw.push_back(gl.weights[i] / 2 * 4 * r * std::pow(s, 3) * p * std::log(r / p) / (2 * kPi));
    } else {
      const double p = r * s;
      const double g = n == 1 ? (r - p) / 2 : (1 / p - 1 / r) / area;
      rho.push_back(p);
      rw.push_back(gl.weights[i] / 2 * r * g * std::pow(p, static_cast<double>(n - 1)));
    }
  }
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t k = 0; k < mp.sphere_nodes.size(); ++k) {
      std::vector<double> y(n);
      for (std::size_t d = 0; d < n; ++d) y[d] = rho[i] * mp.sphere_nodes[k][d];
      mp.volume_nodes.push_back(std::move(y));
      mp.volume_weights.push_back(rw[i] * area * mp.sphere_weights[k]);
    }
  // sphere nodes scaled to radius r
  for (auto& y : mp.sphere_nodes)
    for (auto& v : y) v *= r;
  mp.quadrature += ", " + std::to_string(q.radial) + " radial Gauss nodes";
  return mp;
}

namespace {

double integrate_nodes(const PointFunction& u, const GroupLaw& g, const std::vector<std::vector<double>>& nodes,
                       const std::vector<double>& weights, std::span<const double> x) {
  const std::size_t d = g.dim;
  if (x.size() != d) throw DimensionError("point has the wrong length");
  if (!nodes.empty() && nodes.front().size() != d) throw DimensionError("measure and group dimensions differ");
  std::vector<double> buf(2 * d), xy(d);
  std::copy(x.begin(), x.end(), buf.begin());
  double s = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    std::copy(nodes[k].begin(), nodes[k].end(), buf.begin() + static_cast<std::ptrdiff_t>(d));
    for (std::size_t i = 0; i < d; ++i) xy[i] = g.compiled[i](buf);
    s += weights[k] * u(xy);
  }
  return s;
}

PointFunction compiled(const Expr& e) {
  auto c = std::make_shared<CompiledExpr>(e);
  return [c](std::span<const double> p) { return (*c)(p); };
}

}  // namespace

double M_op(const PointFunction& u, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x) {
  return integrate_nodes(u, g, mp.sphere_nodes, mp.sphere_weights, x);
}
double M_op(const Expr& u, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x) {
  return M_op(compiled(u), g, mp, x);
}
double N_op(const PointFunction& f, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x) {
  return integrate_nodes(f, g, mp.volume_nodes, mp.volume_weights, x);
}
double N_op(const Expr& f, const GroupLaw& g, const MeasurePair& mp, std::span<const double> x) {
  return N_op(compiled(f), g, mp, x);
}

double representation_residual(const Expr& u, const SecondOrderOperator& l, const GroupLaw& g, const MeasurePair& mp,
                               const std::vector<std::vector<double>>& xs) {
  bool is_laplacian = l.dim() == mp.n;
  for (std::size_t i = 0; is_laplacian && i < l.dim(); ++i) {
    is_laplacian = l.b()[i].is_zero();
    for (std::size_t j = 0; j < l.dim(); ++j)
      is_laplacian = is_laplacian && (i == j ? l.a(i, j).is_one() : l.a(i, j).is_zero());
  }
  if (!is_laplacian || g.family != GroupFamily::Abelian || mp.family != "laplacian_ball")
    throw DomainError("representation measures are only instantiated for the Laplacian on an abelian group");
  auto cu = compiled(u), clu = compiled(apply(l, u));
  double worst = 0;
  for (const auto& x : xs) worst = std::max(worst, std::abs(cu(x) - M_op(cu, g, mp, x) + N_op(clu, g, mp, x)));
  return worst;
}

MassIdentity mass_identity(const CompactFunction& u, const GroupLaw& g, const MeasurePair& mp, double big_r,
                           std::size_t order, std::size_t panels) {
  const std::size_t d = g.dim;
  if (u.lo.size() != d || mp.n != d) throw DimensionError("function, measures and group must share the dimension");
  for (std::size_t i = 0; i < d; ++i)
    if (u.lo[i] < -big_r + mp.r || u.hi[i] > big_r - mp.r)
      throw DomainError("support of u is not inside [-R + r, R - r]^dim");
  if (panels == 0) panels = static_cast<std::size_t>(std::ceil(8 * big_r));
  CompiledExpr w(right_invariant_density(g).w);
  const std::vector<double> lo(d, -big_r), hi(d, big_r);
  PointFunction uf = [&u](std::span<const double> p) { return u(p); };
  MassIdentity m;
  m.lhs = integrate_box([&](std::span<const double> x) { return M_op(uf, g, mp, x) * w(x); }, lo, hi, order, panels);
  m.rhs = integrate_box([&](std::span<const double> x) { return u(x) * w(x); }, lo, hi, order, panels);
  m.residual = std::abs(m.lhs - m.rhs);
  return m;
}

}  // namespace lieop
