#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lieop {

inline constexpr std::uint64_t kDefaultSeed = 20140907;

/// Fixed-seed uniform sampling of a box [lo, hi]^dim.
struct SampleSpec {
  std::size_t count = 64;
  double lo = -2.0;
  double hi = 2.0;
  std::uint64_t seed = kDefaultSeed;
};

/// Deterministic across platforms: splitmix64 with 53-bit mantissa mapping.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

std::vector<std::vector<double>> sample_points(std::size_t dim, const SampleSpec& spec);

}  // namespace lieop
