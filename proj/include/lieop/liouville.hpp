#pragma once

// Weighted Lp scans over growing boxes, the convexity gadgets F used with the
// chain rule, and a registry of worked scenarios.

#include "lieop/bump.hpp"
#include "lieop/group.hpp"
#include "lieop/operator.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lieop {

std::vector<double> default_radii();

struct ScanQuadrature {
  std::size_t order = 16;        // the error estimate compares against order - 4
  double panel_width = 4.0;      // per axis
  double unreliable_fraction = 0.01;
};

struct LpScan {
  double p = 1;
  std::size_t dim = 0;
  std::vector<double> radii;
  std::vector<double> values;   // int_{[-R,R]^dim} |u|^p w
  std::vector<double> errors;   // |value(order) - value(order - 4)|
  std::vector<bool> unreliable;
  double growth_ratio = 0;      // last value / previous value
  bool monotone = false;
  /// growth_ratio > threshold: reported as "no evidence of finiteness".
  bool diverging = false;
  std::string trend;
};

inline constexpr double kTrendThreshold = 1.1;

LpScan lp_partial_scan(const Expr& u, double p, const DensityFn& w, std::size_t dim,
                       const std::vector<double>& radii = default_radii(), const ScanQuadrature& q = {});
/// For integrands outside the expression ring (exp of a non-affine argument).
LpScan lp_partial_scan(const PointFunction& u, double p, const DensityFn& w, std::size_t dim,
                       const std::vector<double>& radii = default_radii(), const ScanQuadrature& q = {});

enum class GadgetKind { HarmonicPGe1, HarmonicPLt1, Subharmonic };
std::string to_string(GadgetKind k);
GadgetKind parse_gadget_kind(const std::string& s);

/// harmonic_pge1: (sqrt(1+t^2) - 1)^p, p >= 1
/// harmonic_plt1: (1+t)^p - 1 on t >= 0, 0 < p < 1
/// subharmonic:   0 for t <= 0, ((1+t^4)^{1/4} - 1)^p for t > 0, p >= 1
struct ConvexityGadget {
  GadgetKind kind = GadgetKind::HarmonicPGe1;
  double p = 1;
  ScalarFunction f;
  std::string formula;
};

ConvexityGadget gadget(GadgetKind kind, double p);

struct GadgetCheck {
  bool ok = true;
  std::size_t samples = 0;
  std::vector<std::string> failures;
  /// max relative gap between the closed-form F', F'' and central differences of F
  double derivative_gap = 0;
  /// |F''(d) - F''(-d)| at d = 1e-4 by finite differences (subharmonic kind)
  double second_derivative_jump = 0;
};

/// The kind's sign and bound properties on `count` fixed-seed samples of
/// [-50, 50] ([0, 50] for harmonic_plt1).
GadgetCheck check_gadget(const ConvexityGadget& g, std::size_t count = 10000, std::uint64_t seed = kDefaultSeed);

/// One line of a scenario report.
struct DemoCheck {
  std::string name;
  bool pass = false;
  std::string method;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, std::string>> notes;
};

struct DemoReport {
  std::string scenario;
  std::string description;
  std::vector<DemoCheck> checks;
  std::string basis;    // which statement the scenario is tested against
  std::string verdict;  // "consistent", "inconsistent" or "negative control"
};

struct DemoOptions {
  std::vector<double> radii = default_radii();
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-6;
};

std::vector<std::string> demo_scenarios();
/// Throws DomainError for an unknown id.
DemoReport liouville_demonstration(const std::string& scenario, const DemoOptions& opts = {});

}  // namespace lieop
