#include "zerovit/searchspace.hpp"

#include <algorithm>
#include <json.hpp>
#include <limits>

#include "zerovit/error.hpp"
#include "zerovit/random.hpp"

namespace zerovit {

namespace {

using nlohmann::json;

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& choices) {
  std::uniform_int_distribution<std::size_t> dist(0, choices.size() - 1);
  return choices[dist(rng)];
}

std::vector<int> usable_embeds(const SearchSpace& space) {
  std::vector<int> out;
  for (int e : space.embed_dim_choices) {
    if (!compatible_heads(space, e).empty()) out.push_back(e);
  }
  if (out.empty()) {
    throw Error(ErrorKind::kConfig, "search space \"" + space.name +
                                        "\" has no (embed_dim, heads) pair with embed_dim divisible by heads");
  }
  return out;
}

// Saturating: callers only compare against kMaxEnumeration.
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max()
                                                           : a + b;
}

template <typename T>
std::vector<T> read_list(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorKind::kMissingField, std::string("search space is missing field \"") + key + "\"");
  }
  if (!it->is_array()) throw Error(ErrorKind::kMalformedJson, std::string("field \"") + key + "\" must be an array");
  try {
    return it->get<std::vector<T>>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kMalformedJson, std::string("field \"") + key + "\" has the wrong element type");
  }
}

int read_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorKind::kMissingField, std::string("search space is missing field \"") + key + "\"");
  }
  if (!it->is_number_integer()) {
    throw Error(ErrorKind::kMalformedJson, std::string("field \"") + key + "\" must be an integer");
  }
  return it->get<int>();
}

}  // namespace

SearchSpace tiny_desk_space() {
  SearchSpace s;
  s.name = "tiny-desk";
  s.img_size = 32;
  s.patch_size = 4;
  s.num_classes = 4;
  s.embed_dim_choices = {32, 48, 64};
  s.depth_choices = {2, 3, 4};
  s.head_choices = {2, 4};
  s.mlp_ratio_choices = {1.0, 2.0, 4.0};
  return s;
}

void validate(const SearchSpace& s) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kInvariant, "search space \"" + s.name + "\": " + what);
  };
  if (s.embed_dim_choices.empty()) fail("embed_dim_choices is empty");
  if (s.depth_choices.empty()) fail("depth_choices is empty");
  if (s.head_choices.empty()) fail("head_choices is empty");
  if (s.mlp_ratio_choices.empty()) fail("mlp_ratio_choices is empty");
  if (s.img_size <= 0 || s.patch_size <= 0 || s.img_size % s.patch_size != 0) {
    fail("img_size must be a positive multiple of patch_size");
  }
  if (s.num_classes <= 0) fail("num_classes must be positive");
  for (int e : s.embed_dim_choices) if (e <= 0) fail("embed dims must be positive");
  for (int d : s.depth_choices) if (d <= 0) fail("depths must be positive");
  for (int h : s.head_choices) if (h <= 0) fail("head counts must be positive");
  for (double r : s.mlp_ratio_choices) if (!(r > 0.0)) fail("mlp ratios must be positive");
  if (s.param_range && s.param_range->min > s.param_range->max) fail("param_range min exceeds max");
  usable_embeds(s);
}

std::vector<int> compatible_heads(const SearchSpace& space, int embed_dim) {
  std::vector<int> out;
  for (int h : space.head_choices) {
    if (h > 0 && embed_dim % h == 0) out.push_back(h);
  }
  return out;
}

ArchConfig sample(const SearchSpace& space, std::uint64_t seed) {
  validate(space);
  Rng rng(seed);
  ArchConfig c;
  c.img_size = space.img_size;
  c.patch_size = space.patch_size;
  c.num_classes = space.num_classes;
  c.qkv_bias = space.qkv_bias;
  c.depth = pick(rng, space.depth_choices);
  c.embed_dim = pick(rng, usable_embeds(space));
  const std::vector<int> heads = compatible_heads(space, c.embed_dim);
  c.heads.resize(c.depth);
  c.mlp_ratio.resize(c.depth);
  for (int l = 0; l < c.depth; ++l) {
    c.heads[l] = pick(rng, heads);
    c.mlp_ratio[l] = pick(rng, space.mlp_ratio_choices);
  }
  validate(c);
  return c;
}

ArchConfig sample_constrained(const SearchSpace& space, std::uint64_t seed, std::uint64_t max_tries) {
  if (!space.param_range) {
    throw Error(ErrorKind::kUsage, "sample_constrained: search space has no param_range");
  }
  if (max_tries == 0) throw Error(ErrorKind::kUsage, "sample_constrained: max_tries must be >= 1");
  const ParamRange range = *space.param_range;
  std::uint64_t nearest = 0;
  std::uint64_t nearest_gap = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t attempt = 0; attempt < max_tries; ++attempt) {
    ArchConfig c = sample(space, derive_seed(seed, attempt));
    const std::uint64_t n = count_params(c);
    if (range.contains(n)) return c;
    const std::uint64_t gap = n < range.min ? range.min - n : n - range.max;
    if (gap < nearest_gap) {
      nearest_gap = gap;
      nearest = n;
    }
  }
  throw InfeasibleError("no configuration with " + std::to_string(range.min) + ".." +
                            std::to_string(range.max) + " parameters in " +
                            std::to_string(max_tries) + " draws; nearest miss " +
                            std::to_string(nearest),
                        nearest);
}

std::uint64_t combination_count(const SearchSpace& space) {
  validate(space);
  std::uint64_t total = 0;
  for (int depth : space.depth_choices) {
    for (int e : space.embed_dim_choices) {
      const std::uint64_t per_layer =
          compatible_heads(space, e).size() * space.mlp_ratio_choices.size();
      std::uint64_t n = per_layer == 0 ? 0 : 1;
      for (int l = 0; l < depth; ++l) n = sat_mul(n, per_layer);
      total = sat_add(total, n);
    }
  }
  return total;
}

std::vector<ArchConfig> enumerate_small(const SearchSpace& space) {
  const std::uint64_t total = combination_count(space);
  if (total > kMaxEnumeration) {
    throw Error(ErrorKind::kUsage, "search space \"" + space.name + "\" has " +
                                       std::to_string(total) + " configurations, above the " +
                                       std::to_string(kMaxEnumeration) + " enumeration limit");
  }
  std::vector<ArchConfig> out;
  out.reserve(total);
  for (int depth : space.depth_choices) {
    for (int e : space.embed_dim_choices) {
      const std::vector<int> heads = compatible_heads(space, e);
      const std::size_t per_layer = heads.size() * space.mlp_ratio_choices.size();
      if (per_layer == 0) continue;
      // Mixed-radix counter over layers, one digit per (head, ratio) pair.
      std::vector<std::size_t> digit(depth, 0);
      for (;;) {
        ArchConfig c;
        c.img_size = space.img_size;
        c.patch_size = space.patch_size;
        c.num_classes = space.num_classes;
        c.qkv_bias = space.qkv_bias;
        c.depth = depth;
        c.embed_dim = e;
        c.heads.clear();
        c.mlp_ratio.clear();
        for (int l = 0; l < depth; ++l) {
          c.heads.push_back(heads[digit[l] / space.mlp_ratio_choices.size()]);
          c.mlp_ratio.push_back(space.mlp_ratio_choices[digit[l] % space.mlp_ratio_choices.size()]);
        }
        out.push_back(std::move(c));
        int pos = depth - 1;
        while (pos >= 0 && ++digit[pos] == per_layer) digit[pos--] = 0;
        if (pos < 0) break;
      }
    }
  }
  return out;
}

std::string encode(const SearchSpace& s) {
  json j;
  j["name"] = s.name;
  j["img_size"] = s.img_size;
  j["patch_size"] = s.patch_size;
  j["num_classes"] = s.num_classes;
  j["embed_dim_choices"] = s.embed_dim_choices;
  j["depth_choices"] = s.depth_choices;
  j["head_choices"] = s.head_choices;
  j["mlp_ratio_choices"] = s.mlp_ratio_choices;
  j["qkv_bias"] = s.qkv_bias;
  if (s.param_range) j["param_range"] = {s.param_range->min, s.param_range->max};
  return j.dump();
}

SearchSpace decode_space(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("search space JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kMalformedJson, "search space JSON must be an object");
  SearchSpace s;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorKind::kMalformedJson, "field \"name\" must be a string");
    s.name = it->get<std::string>();
  }
  s.img_size = read_int(j, "img_size");
  s.patch_size = read_int(j, "patch_size");
  s.num_classes = read_int(j, "num_classes");
  s.embed_dim_choices = read_list<int>(j, "embed_dim_choices");
  s.depth_choices = read_list<int>(j, "depth_choices");
  s.head_choices = read_list<int>(j, "head_choices");
  s.mlp_ratio_choices = read_list<double>(j, "mlp_ratio_choices");
  if (auto it = j.find("qkv_bias"); it != j.end()) {
    if (!it->is_boolean()) throw Error(ErrorKind::kMalformedJson, "field \"qkv_bias\" must be a boolean");
    s.qkv_bias = it->get<bool>();
  }
  if (auto it = j.find("param_range"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_unsigned() ||
        !(*it)[1].is_number_unsigned()) {
      throw Error(ErrorKind::kMalformedJson, "field \"param_range\" must be [min, max] non-negative integers");
    }
    s.param_range = ParamRange{(*it)[0].get<std::uint64_t>(), (*it)[1].get<std::uint64_t>()};
  }
  validate(s);
  return s;
}

}  // namespace zerovit
