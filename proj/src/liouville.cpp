#include "lieop/liouville.hpp"

#include "lieop/fields.hpp"
#include "lieop/kolmogorov.hpp"
#include "lieop/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace lieop {

std::vector<double> default_radii() { return {1, 2, 4, 8, 16}; }

LpScan lp_partial_scan(const Expr& u, double p, const DensityFn& w, std::size_t dim, const std::vector<double>& radii,
                       const ScanQuadrature& q) {
  auto cu = std::make_shared<CompiledExpr>(u);
  return lp_partial_scan([cu](std::span<const double> x) { return (*cu)(x); }, p, w, dim, radii, q);
}

LpScan lp_partial_scan(const PointFunction& u, double p, const DensityFn& w, std::size_t dim,
                       const std::vector<double>& radii, const ScanQuadrature& q) {
  if (!(p > 0)) throw DomainError("p must be positive");
  if (dim == 0) throw DimensionError("scan dimension must be positive");
  if (radii.empty()) throw DomainError("need at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw DomainError("radii must be positive and increasing");
  if (q.order < 6) throw DomainError("scan order must be at least 6");
  if (!(q.panel_width > 0)) throw DomainError("panel width must be positive");

  CompiledExpr cw(w.w);
  auto integrand = [&](std::span<const double> x) { return std::pow(std::abs(u(x)), p) * cw(x); };
  LpScan s;
  s.p = p;
  s.dim = dim;
  s.radii = radii;
  for (double r : radii) {
    const std::vector<double> lo(dim, -r), hi(dim, r);
    const auto panels = static_cast<std::size_t>(std::ceil(2 * r / q.panel_width));
    const double fine = integrate_box(integrand, lo, hi, q.order, panels);
    const double coarse = integrate_box(integrand, lo, hi, q.order - 4, panels);
    s.values.push_back(fine);
    s.errors.push_back(std::abs(fine - coarse));
    s.unreliable.push_back(s.errors.back() > q.unreliable_fraction * std::abs(fine));
  }
  s.monotone = true;
  for (std::size_t i = 1; i < s.values.size(); ++i) s.monotone = s.monotone && s.values[i] >= s.values[i - 1];
  if (s.values.size() >= 2) {
    const double a = s.values[s.values.size() - 2], b = s.values.back();
    s.growth_ratio = a > 0 ? b / a : (b > 0 ? std::numeric_limits<double>::infinity() : 1.0);
  } else {
    s.growth_ratio = 1.0;
  }
  s.diverging = s.growth_ratio > kTrendThreshold;
  std::ostringstream os;
  os << (s.diverging ? "no evidence of finiteness" : "values stabilize") << " (growth ratio " << s.growth_ratio;
  if (s.values.size() >= 2) os << " between R = " << radii[radii.size() - 2] << " and R = " << radii.back();
  os << ", threshold " << kTrendThreshold << ")";
  s.trend = os.str();
  return s;
}

std::string to_string(GadgetKind k) {
  switch (k) {
    case GadgetKind::HarmonicPGe1: return "harmonic_pge1";
    case GadgetKind::HarmonicPLt1: return "harmonic_plt1";
    case GadgetKind::Subharmonic: return "subharmonic";
  }
  return "?";
}

GadgetKind parse_gadget_kind(const std::string& s) {
  for (auto k : {GadgetKind::HarmonicPGe1, GadgetKind::HarmonicPLt1, GadgetKind::Subharmonic})
    if (to_string(k) == s) return k;
  throw DomainError("unknown gadget kind '" + s + "'");
}

namespace {

using LD = long double;

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ConvexityGadget gadget(GadgetKind kind, double p) {
  ConvexityGadget g;
  g.kind = kind;
  g.p = p;
  const LD pl = p;
  switch (kind) {
    case GadgetKind::HarmonicPGe1: {
      if (!(p >= 1)) throw DomainError("harmonic_pge1 needs p >= 1");
      // sqrt(1+t^2) - 1 written as t^2 / (sqrt(1+t^2) + 1) to avoid cancellation
      auto base = [](LD t) { return t * t / (std::sqrt(1 + t * t) + 1); };
      g.f.f = [=](LD t) { return std::pow(base(t), pl); };
      g.f.d1 = [=](LD t) { return pl * std::pow(base(t), pl - 1) * t / std::sqrt(1 + t * t); };
      g.f.d2 = [=](LD t) {
        const LD s2 = 1 + t * t, s = std::sqrt(s2);
        return pl * std::pow(base(t), pl - 1) * ((pl - 1) * (1 + s) / s2 + 1 / (s2 * s));
      };
      g.formula = "(sqrt(1+t^2) - 1)^" + num(p);
      break;
    }
    case GadgetKind::HarmonicPLt1: {
      if (!(p > 0 && p < 1)) throw DomainError("harmonic_plt1 needs 0 < p < 1");
      g.f.f = [=](LD t) { return std::pow(1 + t, pl) - 1; };
      g.f.d1 = [=](LD t) { return pl * std::pow(1 + t, pl - 1); };
      g.f.d2 = [=](LD t) { return pl * (pl - 1) * std::pow(1 + t, pl - 2); };
      g.formula = "(1+t)^" + num(p) + " - 1, t >= 0";
      break;
    }
    case GadgetKind::Subharmonic: {
      if (!(p >= 1)) throw DomainError("subharmonic gadget needs p >= 1");
      // (1+t^4)^{1/4} - 1 = t^4 / ((a+1)(a^2+1)) with a = (1+t^4)^{1/4}
      auto a_of = [](LD t) { return std::pow(1 + t * t * t * t, LD(0.25)); };
      auto base = [=](LD t) {
        const LD a = a_of(t);
        return t * t * t * t / ((a + 1) * (a * a + 1));
      };
      g.f.f = [=](LD t) { return t <= 0 ? LD(0) : std::pow(base(t), pl); };
      g.f.d1 = [=](LD t) {
        if (t <= 0) return LD(0);
        const LD a = a_of(t);
        return pl * std::pow(base(t), pl - 1) * t * t * t / (a * a * a);
      };
      g.f.d2 = [=](LD t) {
        if (t <= 0) return LD(0);
        const LD a = a_of(t), q = 1 + t * t * t * t;
        const LD curv = (pl - 1) * t * t * (a * a * a + a * a + a + 1) * std::pow(q, LD(-1.5)) +
                        3 * t * t * std::pow(q, LD(-1.75));
        return pl * std::pow(base(t), pl - 1) * curv;
      };
      g.formula = "0 for t <= 0, ((1+t^4)^(1/4) - 1)^" + num(p) + " for t > 0";
      break;
    }
  }
  g.f.name = to_string(kind) + "(p=" + num(p) + ")";
  return g;
}

namespace {

LD fd_second(const ScalarFunction& f, LD t, LD h) { return (f.f(t + h) - 2 * f.f(t) + f.f(t - h)) / (h * h); }

}  // namespace

GadgetCheck check_gadget(const ConvexityGadget& g, std::size_t count, std::uint64_t seed) {
  GadgetCheck c;
  c.samples = count;
  SplitMix64 rng(seed);
  const bool half_line = g.kind == GadgetKind::HarmonicPLt1;
  const LD p = g.p;
  const LD rel = 1e-12L;
  auto fail = [&](const std::string& what, LD t) {
    c.ok = false;
    if (c.failures.size() < 20) c.failures.push_back(what + " at t = " + num(static_cast<double>(t)));
  };
  for (std::size_t k = 0; k < count; ++k) {
    const LD t = half_line ? rng.uniform(0, 50) : rng.uniform(-50, 50);
    const LD f = g.f.f(t), f1 = g.f.d1(t), f2 = g.f.d2(t);
    if (!std::isfinite(static_cast<double>(f)) || !std::isfinite(static_cast<double>(f1)) ||
        !std::isfinite(static_cast<double>(f2))) {
      fail("non-finite value", t);
      continue;
    }
    const LD bound = std::pow(std::abs(t), p);
    if (f < 0) fail("F < 0", t);
    if (f > bound * (1 + rel)) fail("F > |t|^p", t);
    switch (g.kind) {
      case GadgetKind::HarmonicPGe1:
        if (t != 0 && !(f2 > 0)) fail("F'' <= 0", t);
        break;
      case GadgetKind::HarmonicPLt1:
        if (!(f2 < 0)) fail("F'' >= 0", t);
        break;
      case GadgetKind::Subharmonic:
        if (t <= 0 && (f != 0 || f1 != 0 || f2 != 0)) fail("F not identically 0 on t <= 0", t);
        if (t > 0 && !(f1 > 0)) fail("F' <= 0", t);
        if (t > 0 && !(f2 > 0)) fail("F'' <= 0", t);
        break;
    }
    // closed-form derivatives against central differences with a step relative to |t|
    if (t != 0) {
      const LD h = 1e-3L * std::abs(t);
      const LD d1 = (g.f.f(t + h) - g.f.f(t - h)) / (2 * h);
      const LD d2 = fd_second(g.f, t, h);
      auto gap = [](LD a, LD b) { return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<LD>::min()); };
      if (!(g.kind == GadgetKind::Subharmonic && t <= h)) {
        if (f1 != 0) c.derivative_gap = std::max(c.derivative_gap, static_cast<double>(gap(d1, f1)));
        if (f2 != 0) c.derivative_gap = std::max(c.derivative_gap, static_cast<double>(gap(d2, f2)));
      }
    }
  }
  if (c.derivative_gap > 1e-4) {
    c.ok = false;
    c.failures.push_back("closed-form derivatives disagree with finite differences (" + num(c.derivative_gap) + ")");
  }
  if (!half_line) {
    // one-sided limits of F'' at 0 from finite differences
    const LD d = 1e-4L, h = d / 2;
    c.second_derivative_jump = static_cast<double>(std::abs(fd_second(g.f, d, h) - fd_second(g.f, -d, h)));
    if (g.kind == GadgetKind::Subharmonic && c.second_derivative_jump > 1e-6) {
      c.ok = false;
      c.failures.push_back("F'' jumps at 0 by " + num(c.second_derivative_jump));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// scenario registry

namespace {

constexpr const char* kHarmonicBasis =
    "weighted Lp Liouville property: a global L-harmonic u in Lp of the right-invariant measure vanishes "
    "identically (for nonnegative u, u^p in L1 suffices)";
constexpr const char* kSubharmonicBasis =
    "weighted Lp Liouville property for subharmonic functions: a global L-subharmonic u in Lp of the "
    "right-invariant measure satisfies u <= 0";
constexpr const char* kConstantBasis =
    "the only constant function in L1 of the right-invariant measure is 0; the Haar mass of growing boxes is unbounded";

enum class Expect { Harmonic, Subharmonic, Constant };

struct Builder {
  DemoReport r;
  DemoOptions o;
  bool hypotheses_hold = true;
  bool contradiction = false;

  SampleSpec samples(double lo = -1, double hi = 1) const {
    SampleSpec s;
    s.lo = lo;
    s.hi = hi;
    s.seed = o.seed;
    return s;
  }

  DemoCheck& add(std::string name, bool pass, std::string method) {
    r.checks.push_back(DemoCheck{std::move(name), pass, std::move(method), {}, {}, {}});
    return r.checks.back();
  }

  void nd(const SecondOrderOperator& l) {
    auto rep = check_nd(l, sample_points(l.dim(), samples()));
    auto& c = add("nondegeneracy", rep.nondegenerate, "some |a_ij| > 1e-12 at each sampled point");
    c.tolerances = {{"entry", 1e-12}};
    c.values = {{"points", static_cast<double>(rep.per_point.size())}};
    hypotheses_hold = hypotheses_hold && rep.nondegenerate;
  }

  void hormander(const std::vector<VectorField>& fields, std::size_t dim, std::size_t max_depth,
                 const std::string& label = "hormander") {
    std::vector<Rational> origin(dim, Rational(0));
    auto cert = hormander_rank(fields, origin, max_depth);
    auto& c = add(label, cert.full_rank, "iterated brackets at the origin, rank " + cert.rank_method);
    c.values = {{"rank", static_cast<double>(cert.achieved_rank)},
                {"dim", static_cast<double>(cert.dim)},
                {"depth", static_cast<double>(cert.depth)}};
    std::string w;
    for (const auto& s : cert.witnesses) w += (w.empty() ? "" : ", ") + s;
    c.notes = {{"hormander condition", std::string(cert.full_rank ? "verified" : "failed") + " up to depth " +
                                           std::to_string(cert.depth)},
               {"witnesses", w}};
    hypotheses_hold = hypotheses_hold && cert.full_rank;
  }

  void left_invariance(const SecondOrderOperator& l, const GroupLaw& g, const std::string& label = "left invariance") {
    const double res = check_left_invariance(l, g, samples());
    auto& c = add(label, res <= o.tol, "exact chain rule on the invariance bank, sampled in [-1, 1]");
    c.tolerances = {{"relative", o.tol}};
    c.values = {{"residual", res}};
    hypotheses_hold = hypotheses_hold && res <= o.tol;
  }

  bool classify_u(const SecondOrderOperator& l, const Expr& u, Expect e, const std::string& label = "classification") {
    auto cl = classify(l, u, samples(-2, 2));
    const bool ok = e == Expect::Subharmonic
                        ? cl.kind == Harmonicity::Subharmonic || cl.kind == Harmonicity::Harmonic
                        : cl.kind == Harmonicity::Harmonic;
    auto& c = add(label, ok, "Lu simplified, then signed on fixed-seed samples in [-2, 2]");
    c.tolerances = {{"sign", 1e-10}};
    c.values = {{"min Lu", cl.min_value}, {"max Lu", cl.max_value}};
    c.notes = {{"u", to_string(u, l.vars())},
               {"Lu", to_string(apply(l, u), l.vars())},
               {"class", to_string(cl.kind)},
               {"harmonic", cl.kind == Harmonicity::Harmonic ? "true" : "false"},
               {"exact symbolic zero", cl.exact_zero ? "true" : "false"}};
    hypotheses_hold = hypotheses_hold && ok;
    return ok;
  }

  void nonnegative(const Expr& u, std::size_t dim) {
    CompiledExpr cu(u);
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& x : sample_points(dim, samples(-2, 2))) lo = std::min(lo, cu(x));
    auto& c = add("nonnegativity", lo >= 0, "minimum over fixed-seed samples in [-2, 2]");
    c.values = {{"min u", lo}};
  }

  void chain(const SecondOrderOperator& l, const Expr& u, const ConvexityGadget& g) {
    auto res = chain_rule_residual(l, u, g.f, samples());
    auto& c = add("chain rule " + g.f.name, res.residual <= o.tol, res.method);
    c.tolerances = {{"absolute", o.tol}};
    c.values = {{"residual", res.residual}, {"points", static_cast<double>(res.points)}};
    c.notes = {{"F", g.formula}};
  }

  LpScan scan(const Expr& u, double p, const GroupLaw& g, const DensityFn& w, const std::vector<double>& radii, const ScanQuadrature& q = {}) {
    auto s = lp_partial_scan(u, p, w, g.dim, radii, q);
    bool reliable = std::none_of(s.unreliable.begin(), s.unreliable.end(), [](bool b) { return b; });
    auto& c = add("lp scan p=" + num(p), s.monotone, "tensor Gauss-Legendre, order " + std::to_string(q.order) +
                                                          " against " + std::to_string(q.order - 4));
    c.tolerances = {{"trend threshold", kTrendThreshold}, {"unreliable fraction", q.unreliable_fraction}};
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
      c.values.emplace_back("R=" + num(s.radii[i]), s.values[i]);
      c.values.emplace_back("error R=" + num(s.radii[i]), s.errors[i]);
    }
    c.values.emplace_back("growth ratio", s.growth_ratio);
    c.notes = {{"weight", to_string(w.w, g.vars)},
               {"trend", s.trend},
               {"monotone", s.monotone ? "true" : "false"},
               {"reliable", reliable ? "true" : "false"}};
    // a finite-looking integral of a nonzero (sub)harmonic u with u > 0 somewhere would contradict the Liouville statement
    if (!s.diverging && reliable) contradiction = true;
    return s;
  }

  DemoReport finish() {
    if (contradiction)
      r.verdict = "inconsistent";
    else if (!hypotheses_hold)
      r.verdict = "negative control";
    else
      r.verdict = "consistent";
    return std::move(r);
  }
};

DemoReport heat_counterexample(Builder& b) {
  b.r.description = "heat operator on R^3, u = exp(x1 + x2 + 2t): harmonic, positive, not in any weighted Lp";
  b.r.basis = kHarmonicBasis;
  auto h = heat_operator(2);
  auto g = make_abelian(3);
  auto u = parse("exp(x1 + x2 + 2*t)", h.vars());
  b.nd(h);
  auto frame = coordinate_frame(h.vars());
  b.hormander({frame[0], frame[1], Expr(-1) * frame[2]}, 3, 1);
  b.left_invariance(h, g);
  b.classify_u(h, u, Expect::Harmonic);
  b.nonnegative(u, 3);
  for (auto [k, p] : {std::pair{GadgetKind::HarmonicPGe1, 1.0}, {GadgetKind::HarmonicPGe1, 2.0},
                      {GadgetKind::HarmonicPLt1, 0.5}, {GadgetKind::Subharmonic, 1.0},
                      {GadgetKind::Subharmonic, 2.0}})
    b.chain(h, u, gadget(k, p));
  auto w = right_invariant_density(g);
  for (double p : {1.0, 2.0}) b.scan(u, p, g, w, b.o.radii);
  return b.finish();
}

DemoReport constant_one(Builder& b) {
  b.r.description = "u = 1 on the inverse matrix-exponential group with B = [[1,1],[-1,0]] (trace 1)";
  b.r.basis = kConstantBasis;
  auto g = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  auto fr = left_invariant_frame(g);
  auto l = from_frame({fr[1]}, Expr(-1) * fr[0], g.vars, {Rational(1, 2)});
  b.nd(l);
  b.hormander({fr[1], fr[0]}, 3, 3);
  b.left_invariance(l, g);
  b.classify_u(l, Expr(1), Expect::Constant);
  auto cc = constancy_conditions(l, Expr(1));
  auto& c = b.add("constancy", cc.constant && cc.fields_vanish && cc.harmonic_and_psi_vanish,
                  "symbolic derivatives on samples");
  c.notes = {{"constant", cc.constant ? "true" : "false"}};
  auto w = right_invariant_density(g);
  auto& cw = b.add("density", equal_on_samples(w.w, parse("exp(-1*t)", g.vars), 3), "equal_on_samples");
  cw.notes = {{"density", to_string(w.w, g.vars)}};
  auto s = b.scan(Expr(1), 1.0, g, w, b.o.radii);
  // closed form of the weighted mass of [-R, R]^3
  auto small = lp_partial_scan(Expr(1), 1.0, w, 3, {1, 2});
  double worst = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double r = small.radii[i], exact = 4 * r * r * (std::exp(r) - std::exp(-r));
    worst = std::max(worst, std::abs(small.values[i] - exact) / exact);
  }
  auto& cf = b.add("closed-form mass", worst <= 1e-6, "4R^2 (e^R - e^-R) at R = 1, 2");
  cf.tolerances = {{"relative", 1e-6}};
  cf.values = {{"relative error", worst}};
  double haar = 0;
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    const double m = haar_mass_partial(g, s.radii[i]);
    haar = std::max(haar, std::abs(s.values[i] - m) / m);
  }
  auto& ch = b.add("matches haar_mass_partial", haar <= 1e-6, "relative difference at each radius");
  ch.tolerances = {{"relative", 1e-6}};
  ch.values = {{"relative difference", haar}};
  return b.finish();
}

DemoReport laplacian_subharmonic(Builder& b) {
  b.r.description = "Laplacian on R^2, u = x1^2: subharmonic, nonnegative, polynomial growth";
  b.r.basis = kSubharmonicBasis;
  auto l = laplacian(2);
  auto g = make_abelian(2);
  auto u = parse("x1^2", l.vars());
  b.nd(l);
  b.hormander(coordinate_frame(l.vars()), 2, 1);
  b.left_invariance(l, g);
  b.classify_u(l, u, Expect::Subharmonic);
  b.nonnegative(u, 2);
  b.chain(l, u, gadget(GadgetKind::Subharmonic, 1.0));
  auto w = right_invariant_density(g);
  b.scan(u, 1.0, g, w, b.o.radii);
  // the trend detector does see finiteness when it is there
  PointFunction bell = [](std::span<const double> x) { return std::exp(-x[0] * x[0] - x[1] * x[1]); };
  auto gauss = lp_partial_scan(bell, 2.0, w, 2, b.o.radii);
  const double target = std::numbers::pi / 2, err = std::abs(gauss.values.back() - target);
  auto& c = b.add("scan control exp(-|x|^2), p=2", !gauss.diverging && err <= 1e-8,
                  "same scan; the limit is pi/2 and the trend must not flag divergence");
  c.tolerances = {{"absolute", 1e-8}};
  c.values = {{"last value", gauss.values.back()}, {"growth ratio", gauss.growth_ratio}};
  c.notes = {{"trend", gauss.trend}};
  return b.finish();
}

DemoReport kolmogorov_n1(Builder& b) {
  b.r.description = "classical Kolmogorov operator d_x1^2 + x1 d_x2 - d_t on R^3";
  b.r.basis = kHarmonicBasis;
  auto spec = make_kolmogorov(RationalMatrix{{1, 0}, {0, 0}}, RationalMatrix{{0, 0}, {1, 0}});
  auto l = operator_of(spec);
  auto g = group_law(spec);
  b.nd(l);
  auto hy = hypoellipticity_check(spec);
  auto& ch = b.add("covariance criterion", hy.verdict == "pass", "quadrature positivity of C(t) and Kalman rank");
  ch.tolerances = {{"eigenvalue", hy.tol}};
  ch.values = {{"kalman rank", static_cast<double>(hy.kalman_rank)}};
  for (std::size_t i = 0; i < hy.t_samples.size(); ++i)
    ch.values.emplace_back("scaled min eig t=" + num(hy.t_samples[i]), hy.scaled_min_eigenvalues[i]);
  ch.notes = {{"verdict", hy.verdict}};
  b.hypotheses_hold = b.hypotheses_hold && hy.verdict == "pass";
  // X = d_x1 and Y = x1 d_x2 - d_t
  VectorField x{{Expr(1), Expr(0), Expr(0)}, "X"};
  VectorField y{{Expr(0), parse("x1", l.vars()), Expr(-1)}, "Y"};
  b.hormander({x, y}, 3, 1);
  b.left_invariance(l, g);
  auto w = weight(spec);
  auto rd = right_invariant_density(g);
  auto& cw = b.add("weight", equal_on_samples(w.w, rd.w, 3), "weight against the right-invariant density");
  cw.notes = {{"weight", to_string(w.w, l.vars())}};
  auto u = parse("x1^2 + 2*t", l.vars());
  auto v = parse("exp(x1 + t)", l.vars());
  b.classify_u(l, u, Expect::Harmonic);
  b.classify_u(l, v, Expect::Harmonic, "classification exp(x1 + t)");
  b.chain(l, u, gadget(GadgetKind::HarmonicPGe1, 2.0));
  b.chain(l, u, gadget(GadgetKind::Subharmonic, 1.0));
  b.chain(l, v, gadget(GadgetKind::HarmonicPLt1, 0.5));
  const double ann = kernel_annihilation_residual(spec, {{0, 0, 0.5}, {0.3, -0.2, 1}, {1, 1, 2}});
  auto& ck = b.add("kernel annihilation", ann <= 1e-4, "finite differences of the Gaussian kernel");
  ck.tolerances = {{"relative", 1e-4}};
  ck.values = {{"residual", ann}};
  const double mass = kernel_mass(spec, 0.5);
  auto& cm = b.add("kernel mass", std::abs(mass - 1) <= 1e-6, "Gauss-Legendre over +-10 standard deviations, t = 0.5");
  cm.tolerances = {{"absolute", 1e-6}};
  cm.values = {{"mass", mass}};
  b.scan(u, 1.0, g, w, b.o.radii);
  return b.finish();
}

DemoReport polarized_heisenberg(Builder& b) {
  b.r.description = "polarized Heisenberg operator d_x1^2 - T, T = d_t + x1 d_x2, u = x2 - t x1";
  b.r.basis = kHarmonicBasis;
  auto g = make_inverse_matrix_exponential(RationalMatrix{{0, 0}, {1, 0}});
  auto fr = left_invariant_frame(g);
  auto l = from_frame({fr[1]}, Expr(-1) * fr[0], g.vars);
  auto u = parse("x2 - t*x1", g.vars);
  b.nd(l);
  b.hormander({fr[0], fr[1]}, 3, 1);
  b.left_invariance(l, g);
  b.classify_u(l, u, Expect::Harmonic);
  b.chain(l, u, gadget(GadgetKind::HarmonicPGe1, 1.5));
  auto w = right_invariant_density(g);
  for (double p : {1.0, 2.0}) b.scan(u, p, g, w, b.o.radii);
  return b.finish();
}

DemoReport trace_one_group(Builder& b) {
  b.r.description = "(1/2) X1^2 - T on the inverse matrix-exponential group with B = [[1,1],[-1,0]], u = exp(-t)";
  b.r.basis = kSubharmonicBasis;
  auto g = make_inverse_matrix_exponential(RationalMatrix{{1, 1}, {-1, 0}});
  auto fr = left_invariant_frame(g);
  auto l = from_frame({fr[1]}, Expr(-1) * fr[0], g.vars, {Rational(1, 2)});
  auto u = parse("exp(-1*t)", g.vars);
  b.nd(l);
  b.hormander({fr[1], fr[0]}, 3, 3);
  b.left_invariance(l, g);
  b.classify_u(l, u, Expect::Subharmonic);
  b.nonnegative(u, 3);
  b.chain(l, u, gadget(GadgetKind::Subharmonic, 1.0));
  auto w = right_invariant_density(g);
  b.scan(u, 1.0, g, w, b.o.radii);
  return b.finish();
}

DemoReport companion_five(Builder& b) {
  b.r.description =
      "matrix-exponential group of the nilpotent companion matrix of s^3, frame {d_t, X1}, five operators";
  b.r.basis = kHarmonicBasis;
  auto g = make_matrix_exponential(RationalMatrix{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  auto fr = left_invariant_frame(g);
  const VectorField& dt = fr[0];
  const VectorField& x1 = fr[1];
  b.hormander({dt, x1}, 4, 2);
  auto um = unimodularity(g, b.samples());
  auto& cu = b.add("unimodular", um.unimodular, "left and right densities agree on samples (trace B = 0)");
  cu.values = {{"ratio deviation", um.max_ratio_deviation}};
  auto minus = [](const VectorField& f) { return Expr(-1) * f; };
  struct Item {
    std::string name;
    SecondOrderOperator l;
    std::string u;
  };
  std::vector<Item> ops = {
      {"d_t^2 + X1^2", from_frame({dt, x1}, std::nullopt, g.vars), "t"},
      {"d_t^2 + X1", from_frame({dt}, x1, g.vars), "t"},
      {"d_t^2 - X1", from_frame({dt}, minus(x1), g.vars), "t"},
      {"X1^2 + d_t", from_frame({x1}, dt, g.vars), "x1"},
      {"X1^2 - d_t", from_frame({x1}, minus(dt), g.vars), "x1"},
  };
  auto w = right_invariant_density(g);
  ScanQuadrature q;
  q.order = 6;  // the scanned |u|^2 are polynomials
  for (const auto& it : ops) {
    b.left_invariance(it.l, g, "left invariance " + it.name);
    b.classify_u(it.l, parse(it.u, g.vars), Expect::Harmonic, "classification " + it.name);
  }
  b.scan(parse("t", g.vars), 2.0, g, w, b.o.radii, q);
  b.scan(parse("x1", g.vars), 2.0, g, w, b.o.radii, q);
  return b.finish();
}

using Scenario = DemoReport (*)(Builder&);

const std::vector<std::pair<std::string, Scenario>>& registry() {
  static const std::vector<std::pair<std::string, Scenario>> r = {
      {"heat_counterexample", heat_counterexample},
      {"constant_one", constant_one},
      {"laplacian_subharmonic", laplacian_subharmonic},
      {"kolmogorov_n1", kolmogorov_n1},
      {"polarized_heisenberg", polarized_heisenberg},
      {"trace_one_group", trace_one_group},
      {"companion_five", companion_five},
  };
  return r;
}

}  // namespace

std::vector<std::string> demo_scenarios() {
  std::vector<std::string> out;
  for (const auto& [id, fn] : registry()) out.push_back(id);
  return out;
}

DemoReport liouville_demonstration(const std::string& scenario, const DemoOptions& opts) {
  for (const auto& [id, fn] : registry())
    if (id == scenario) {
      if (opts.radii.size() < 2) throw DomainError("a demonstration needs at least two radii");
      Builder b;
      b.o = opts;
      b.r.scenario = id;
      return fn(b);
    }
  throw DomainError("unknown scenario '" + scenario + "'");
}

}  // namespace lieop
