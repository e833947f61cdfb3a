#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace zerovit {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream seeds from one root seed, keyed by purpose or index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Normal(0, stddev) redrawn until it falls within +-bound.
double truncated_normal(Rng& rng, double stddev, double bound);

}  // namespace zerovit
