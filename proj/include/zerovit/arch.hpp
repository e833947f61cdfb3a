#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace zerovit {

/// One ViT architecture. JSON field names match the member names.
struct ArchConfig {
  int img_size = 32;
  int patch_size = 4;
  int num_classes = 4;
  int embed_dim = 32;
  int depth = 1;
  std::vector<int> heads{2};
  std::vector<double> mlp_ratio{2.0};
  bool qkv_bias = true;

  bool operator==(const ArchConfig&) const = default;
};

// Throws Error(kInvariant) naming the first violated constraint.
void validate(const ArchConfig& config);

int num_patches(const ArchConfig& config);
int mlp_hidden(const ArchConfig& config, int layer);

// Closed-form count of scalar parameters, without materializing.
std::uint64_t count_params(const ArchConfig& config);

// Canonical JSON: sorted keys, no whitespace. Stable input for config_hash.
std::string encode(const ArchConfig& config);
// Parses and validates. Error kinds: kMalformedJson, kMissingField, kInvariant.
ArchConfig decode(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const ArchConfig& config);
std::string hex16(std::uint64_t value);

}  // namespace zerovit
