#include "lieop/sampling.hpp"

namespace lieop {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<std::vector<double>> sample_points(std::size_t dim, const SampleSpec& spec) {
  SplitMix64 rng(spec.seed);
  std::vector<std::vector<double>> points(spec.count, std::vector<double>(dim));
  for (auto& p : points)
    for (auto& v : p) v = rng.uniform(spec.lo, spec.hi);
  return points;
}

}  // namespace lieop
