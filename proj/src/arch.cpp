#include "zerovit/arch.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "zerovit/error.hpp"

namespace zerovit {

namespace {

using nlohmann::json;

[[noreturn]] void violated(const std::string& what) {
  throw Error(ErrorKind::kInvariant, "invalid architecture: " + what);
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::kMissingField, std::string("architecture is missing field \"") + key + "\"");
  }
  return *it;
}

int require_int(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::kMalformedJson, std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<int>();
}

}  // namespace

void validate(const ArchConfig& c) {
  if (c.img_size <= 0) violated("img_size must be positive");
  if (c.patch_size <= 0) violated("patch_size must be positive");
  if (c.num_classes <= 0) violated("num_classes must be positive");
  if (c.embed_dim <= 0) violated("embed_dim must be positive");
  if (c.depth <= 0) violated("depth must be positive");
  if (c.img_size % c.patch_size != 0) {
    violated("img_size " + std::to_string(c.img_size) + " is not divisible by patch_size " +
             std::to_string(c.patch_size));
  }
  if (c.heads.size() != static_cast<std::size_t>(c.depth)) {
    violated("heads has " + std::to_string(c.heads.size()) + " entries but depth is " +
             std::to_string(c.depth));
  }
  if (c.mlp_ratio.size() != static_cast<std::size_t>(c.depth)) {
    violated("mlp_ratio has " + std::to_string(c.mlp_ratio.size()) + " entries but depth is " +
             std::to_string(c.depth));
  }
  for (int l = 0; l < c.depth; ++l) {
    const int h = c.heads[l];
    if (h <= 0 || c.embed_dim % h != 0) {
      violated("embed_dim " + std::to_string(c.embed_dim) + " is not divisible by heads[" +
               std::to_string(l) + "] = " + std::to_string(h));
    }
    const double r = c.mlp_ratio[l];
    if (!std::isfinite(r) || r <= 0.0 || std::lround(c.embed_dim * r) < 1) {
      violated("mlp_ratio[" + std::to_string(l) + "] gives an empty MLP");
    }
  }
}

int num_patches(const ArchConfig& c) {
  const int side = c.img_size / c.patch_size;
  return side * side;
}

int mlp_hidden(const ArchConfig& c, int layer) {
  return static_cast<int>(std::lround(c.embed_dim * c.mlp_ratio.at(layer)));
}

std::uint64_t count_params(const ArchConfig& c) {
  validate(c);
  const std::uint64_t d = c.embed_dim;
  const std::uint64_t tokens = num_patches(c) + 1;
  const std::uint64_t patch_in = 3ULL * c.patch_size * c.patch_size;
  std::uint64_t total = patch_in * d + d  // patch projection
                        + d               // class token
                        + tokens * d;     // positional embedding
  for (int l = 0; l < c.depth; ++l) {
    const std::uint64_t h = mlp_hidden(c, l);
    total += 2 * d;                             // pre-attention norm
    total += 4 * d * d + (c.qkv_bias ? 3 * d : 0) + d;
    total += 2 * d;                             // pre-MLP norm
    total += d * h + h + h * d + d;
  }
  total += 2 * d;                               // final norm
  total += d * c.num_classes + c.num_classes;   // classifier
  return total;
}

std::string encode(const ArchConfig& c) {
  json j;
  j["img_size"] = c.img_size;
  j["patch_size"] = c.patch_size;
  j["num_classes"] = c.num_classes;
  j["embed_dim"] = c.embed_dim;
  j["depth"] = c.depth;
  j["heads"] = c.heads;
  j["mlp_ratio"] = c.mlp_ratio;
  j["qkv_bias"] = c.qkv_bias;
  return j.dump();
}

ArchConfig decode(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("architecture JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kMalformedJson, "architecture JSON must be an object");

  ArchConfig c;
  c.img_size = require_int(j, "img_size");
  c.patch_size = require_int(j, "patch_size");
  c.num_classes = require_int(j, "num_classes");
  c.embed_dim = require_int(j, "embed_dim");
  c.depth = require_int(j, "depth");

  const json& heads = require(j, "heads");
  if (!heads.is_array()) throw Error(ErrorKind::kMalformedJson, "field \"heads\" must be an array");
  c.heads.clear();
  for (const json& h : heads) {
    if (!h.is_number_integer()) throw Error(ErrorKind::kMalformedJson, "field \"heads\" must hold integers");
    c.heads.push_back(h.get<int>());
  }

  const json& ratios = require(j, "mlp_ratio");
  if (!ratios.is_array()) throw Error(ErrorKind::kMalformedJson, "field \"mlp_ratio\" must be an array");
  c.mlp_ratio.clear();
  for (const json& r : ratios) {
    if (!r.is_number()) throw Error(ErrorKind::kMalformedJson, "field \"mlp_ratio\" must hold numbers");
    c.mlp_ratio.push_back(r.get<double>());
  }

  const json& bias = require(j, "qkv_bias");
  if (!bias.is_boolean()) throw Error(ErrorKind::kMalformedJson, "field \"qkv_bias\" must be a boolean");
  c.qkv_bias = bias.get<bool>();

  validate(c);
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ArchConfig& c) { return fnv1a64(encode(c)); }

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace zerovit
