#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zerovit/arch.hpp"

namespace zerovit {

struct ParamRange {
  std::uint64_t min = 0;
  std::uint64_t max = 0;

  bool contains(std::uint64_t n) const { return n >= min && n <= max; }
  bool operator==(const ParamRange&) const = default;
};

/// Layer-wise ViT search space. Heads and MLP ratios are chosen per block.
struct SearchSpace {
  std::string name = "custom";
  int img_size = 32;
  int patch_size = 4;
  int num_classes = 4;
  std::vector<int> embed_dim_choices;
  std::vector<int> depth_choices;
  std::vector<int> head_choices;
  std::vector<double> mlp_ratio_choices;
  bool qkv_bias = true;
  std::optional<ParamRange> param_range;

  bool operator==(const SearchSpace&) const = default;
};

inline constexpr std::uint64_t kDefaultMaxTries = 10'000;
inline constexpr std::uint64_t kMaxEnumeration = 100'000;

// img 32, patch 4, 4 classes, embed {32, 48, 64}, depth {2, 3, 4},
// heads {2, 4}, mlp ratio {1, 2, 4}.
SearchSpace tiny_desk_space();

void validate(const SearchSpace& space);

// Head choices dividing `embed_dim`, in declaration order.
std::vector<int> compatible_heads(const SearchSpace& space, int embed_dim);

ArchConfig sample(const SearchSpace& space, std::uint64_t seed);

// Rejection-samples until count_params lands in space.param_range. Throws
// InfeasibleError carrying the nearest miss after max_tries draws.
ArchConfig sample_constrained(const SearchSpace& space, std::uint64_t seed,
                              std::uint64_t max_tries = kDefaultMaxTries);

// Number of valid configurations, without enumerating them.
std::uint64_t combination_count(const SearchSpace& space);

// Every valid configuration once, in lexicographic choice order. Throws
// kUsage when combination_count exceeds kMaxEnumeration.
std::vector<ArchConfig> enumerate_small(const SearchSpace& space);

std::string encode(const SearchSpace& space);
SearchSpace decode_space(std::string_view text);

}  // namespace zerovit
