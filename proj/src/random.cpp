#include "zerovit/random.hpp"

#include <cmath>

#include "zerovit/arch.hpp"

namespace zerovit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  return splitmix64(seed ^ fnv1a64(purpose));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + index);
}

double truncated_normal(Rng& rng, double stddev, double bound) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (;;) {
    const double v = normal(rng);
    if (std::fabs(v) <= bound) return v;
  }
}

}  // namespace zerovit
