#include "zerovit/proxies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "zerovit/error.hpp"
#include "zerovit/parallel.hpp"
#include "zerovit/random.hpp"

namespace zerovit {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Restores the signed parameter values when the scope ends.
class SignedParamsGuard {
 public:
  explicit SignedParamsGuard(Model& model) : model_(model) {
    saved_.reserve(model.params.size());
    for (TaggedParam& p : model.params) {
      saved_.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
      for (double& v : p.tensor.data()) v = std::fabs(v);
    }
  }
  ~SignedParamsGuard() {
    for (std::size_t i = 0; i < saved_.size(); ++i) {
      std::copy(saved_[i].begin(), saved_[i].end(), model_.params[i].tensor.data().begin());
    }
  }
  SignedParamsGuard(const SignedParamsGuard&) = delete;
  SignedParamsGuard& operator=(const SignedParamsGuard&) = delete;

 private:
  Model& model_;
  std::vector<std::vector<double>> saved_;
};

void collect_grads(Model& model, ForwardPass& fp) {
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    TaggedParam& p = model.params[i];
    const Tensor& leaf = fp.graph.tensor(fp.param_nodes[i]);
    auto dst = p.tensor.grad();
    if (leaf.has_grad()) std::copy(leaf.grad().begin(), leaf.grad().end(), dst.begin());
    if (!all_finite(dst)) {
      throw Error(ErrorKind::kNumeric, "non-finite gradient for " + std::string(to_string(p.role)) +
                                           " in layer " + std::to_string(p.layer_index));
    }
  }
}

void clear_grads(Model& model) {
  for (TaggedParam& p : model.params) p.tensor.clear_grad();
}

linalg::Matrix as_matrix(const Tensor& t, std::span<const double> values) {
  return linalg::Matrix(t.dim(0), t.dim(1), std::vector<double>(values.begin(), values.end()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_pairs(std::span<const WeightGrad> block, std::size_t expected, const char* who) {
  if (block.size() != expected) {
    throw Error(ErrorKind::kUsage, std::string(who) + ": expected " + std::to_string(expected) +
                                       " weight/gradient pairs, got " + std::to_string(block.size()));
  }
  for (const WeightGrad& wg : block) {
    if (wg.weight.rows() != wg.grad.rows() || wg.weight.cols() != wg.grad.cols()) {
      throw Error(ErrorKind::kShape, std::string(who) + ": gradient shape differs from weight shape");
    }
  }
}

// Sum over the scope's weight matrices of grad * weight, where the weight
// is the magnitude the loss was evaluated at.
double module_saliency(const Model& model, ModuleTag tag) {
  double total = 0.0;
  for (int l = 0; l < model.config.depth; ++l) {
    const std::vector<WeightGrad> pairs = linearized_pairs(model, l, tag);
    for (const WeightGrad& wg : pairs) total += dot(wg.grad.data(), wg.weight.data());
  }
  return total;
}

ProxyReport base_report(const ArchConfig& config, std::string_view name) {
  ProxyReport r;
  r.config = config;
  r.config_hash = config_hash(config);
  r.proxy_name = std::string(name);
  r.param_count = count_params(config);
  return r;
}

[[noreturn]] void rethrow_with_hash(const Error& e, const ArchConfig& config) {
  const std::string msg = "config " + hex16(config_hash(config)) + ": " + e.what();
  if (const auto* inf = dynamic_cast<const InfeasibleError*>(&e)) throw InfeasibleError(msg, inf->nearest_miss());
  throw Error(e.kind(), msg);
}

std::vector<const TaggedParam*> scored_weights(const Model& model) {
  return tagged_params(model, ParamFilter{{ModuleTag::kMsa, ModuleTag::kMlp}, true});
}

}  // namespace

std::uint64_t init_seed_for(const ArchConfig& config, SeedPolicy policy, std::uint64_t seed) {
  return policy == SeedPolicy::kFixed ? seed : derive_seed(seed, config_hash(config));
}

void synflow_forward_backward(Model& model) {
  clear_grads(model);
  SignedParamsGuard guard(model);
  ForwardPass fp = forward_classify(model, all_ones_input(model.config));
  const NodeId loss = ops::sum(fp.graph, fp.logits);
  fp.graph.backward(loss);
  collect_grads(model, fp);
}

double d_msa(std::span<const WeightGrad> block) {
  check_pairs(block, 4, "d_msa");
  double total = 0.0;
  for (const WeightGrad& wg : block) total += linalg::nuclear_norm(wg.grad) * linalg::nuclear_norm(wg.weight);
  return total;
}

double s_mlp(std::span<const WeightGrad> block) {
  check_pairs(block, 2, "s_mlp");
  double total = 0.0;
  for (const WeightGrad& wg : block) total += dot(wg.grad.data(), wg.weight.data());
  return total;
}

std::vector<WeightGrad> linearized_pairs(const Model& model, int layer, ModuleTag tag) {
  std::vector<WeightGrad> out;
  for (const TaggedParam* p : tagged_params(model, ParamFilter{{tag}, true})) {
    if (p->layer_index != layer) continue;
    if (!p->tensor.has_grad()) {
      throw Error(ErrorKind::kUsage, "parameter " + std::string(to_string(p->role)) + " in layer " +
                                         std::to_string(layer) + " has no gradient");
    }
    std::vector<double> magnitude(p->tensor.data().begin(), p->tensor.data().end());
    for (double& v : magnitude) v = std::fabs(v);
    out.push_back({linalg::Matrix(p->tensor.dim(0), p->tensor.dim(1), std::move(magnitude)),
                   as_matrix(p->tensor, p->tensor.grad())});
  }
  return out;
}

ProxyReport dss_score_model(Model& model) {
  const auto start = Clock::now();
  ProxyReport r = base_report(model.config, "dss");
  synflow_forward_backward(model);
  const int depth = model.config.depth;
  r.d_msa_per_layer.reserve(depth);
  r.s_mlp_per_layer.reserve(depth);
  for (int l = 0; l < depth; ++l) {
    r.d_msa_per_layer.push_back(d_msa(linearized_pairs(model, l, ModuleTag::kMsa)));
    r.s_mlp_per_layer.push_back(s_mlp(linearized_pairs(model, l, ModuleTag::kMlp)));
  }
  double score = 0.0;
  for (double d : r.d_msa_per_layer) score += d;
  for (double s : r.s_mlp_per_layer) score += s;
  if (!std::isfinite(score)) throw Error(ErrorKind::kNumeric, "dss score is not finite");
  r.score = score;
  r.elapsed_ms = elapsed_ms(start);
  return r;
}

ProxyReport dss_score(const ArchConfig& config, std::uint64_t seed) {
  try {
    Model model = materialize(config, seed);
    return dss_score_model(model);
  } catch (const Error& e) {
    rethrow_with_hash(e, config);
  }
}

double saliency_modular_model(Model& model, SaliencyScope scope) {
  synflow_forward_backward(model);
  switch (scope) {
    case SaliencyScope::kMsa: return module_saliency(model, ModuleTag::kMsa);
    case SaliencyScope::kMlp: return module_saliency(model, ModuleTag::kMlp);
    case SaliencyScope::kBoth:
      return module_saliency(model, ModuleTag::kMsa) + module_saliency(model, ModuleTag::kMlp);
  }
  return 0.0;
}

double saliency_modular(const ArchConfig& config, std::uint64_t seed, SaliencyScope scope) {
  try {
    Model model = materialize(config, seed);
    return saliency_modular_model(model, scope);
  } catch (const Error& e) {
    rethrow_with_hash(e, config);
  }
}

void batch_forward_backward(Model& model, const BatchSpec& batch) {
  if (batch.batch_size == 0) throw Error(ErrorKind::kUsage, "batch_size must be positive");
  clear_grads(model);
  const ArchConfig& c = model.config;
  const std::size_t side = c.img_size;
  Rng rng(batch.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor images({batch.batch_size, 3, side, side});
  for (double& v : images.data()) v = normal(rng);
  std::uniform_int_distribution<std::size_t> label(0, static_cast<std::size_t>(c.num_classes) - 1);
  std::vector<std::size_t> labels(batch.batch_size);
  for (auto& y : labels) y = label(rng);

  ForwardPass fp = forward_batch(model, images);
  NodeId loss = ops::cross_entropy(fp.graph, fp.logits, std::move(labels));
  if (batch.loss_scale != 1.0) loss = ops::scale(fp.graph, loss, batch.loss_scale);
  fp.graph.backward(loss);
  collect_grads(model, fp);
}

double snip_score(const ArchConfig& config, std::uint64_t seed, const BatchSpec& batch) {
  try {
    Model model = materialize(config, seed);
    batch_forward_backward(model, batch);
    double total = 0.0;
    for (const TaggedParam* p : scored_weights(model)) {
      const auto w = p->tensor.data();
      const auto g = p->tensor.grad();
      for (std::size_t i = 0; i < w.size(); ++i) total += std::fabs(g[i] * w[i]);
    }
    return total;
  } catch (const Error& e) {
    rethrow_with_hash(e, config);
  }
}

double grad_norm_score(const ArchConfig& config, std::uint64_t seed, const BatchSpec& batch) {
  try {
    Model model = materialize(config, seed);
    batch_forward_backward(model, batch);
    double sq = 0.0;
    for (const TaggedParam* p : scored_weights(model)) {
      for (double g : p->tensor.grad()) sq += g * g;
    }
    return std::sqrt(sq);
  } catch (const Error& e) {
    rethrow_with_hash(e, config);
  }
}

const std::vector<std::string>& proxy_names() {
  static const std::vector<std::string> names = {"dss",          "snip",         "gradnorm",
                                                 "saliency_msa", "saliency_mlp", "saliency_both",
                                                 "params"};
  return names;
}

bool is_known_proxy(std::string_view name) {
  const auto& names = proxy_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ProxyReport score_proxy(std::string_view name, const ArchConfig& config, std::uint64_t seed,
                        const BatchSpec& batch) {
  if (!is_known_proxy(name)) {
    throw Error(ErrorKind::kUsage, "unknown proxy \"" + std::string(name) + "\"");
  }
  if (name == "dss") return dss_score(config, seed);

  const auto start = Clock::now();
  ProxyReport r = base_report(config, name);
  if (name == "snip") {
    r.score = snip_score(config, seed, batch);
  } else if (name == "gradnorm") {
    r.score = grad_norm_score(config, seed, batch);
  } else if (name == "saliency_msa") {
    r.score = saliency_modular(config, seed, SaliencyScope::kMsa);
  } else if (name == "saliency_mlp") {
    r.score = saliency_modular(config, seed, SaliencyScope::kMlp);
  } else if (name == "saliency_both") {
    r.score = saliency_modular(config, seed, SaliencyScope::kBoth);
  } else {
    r.score = static_cast<double>(r.param_count);
  }
  r.elapsed_ms = elapsed_ms(start);
  return r;
}

std::vector<ProxyReport> score_many(std::span<const ArchConfig> configs, std::string_view name,
                                    SeedPolicy policy, std::uint64_t seed, std::size_t jobs,
                                    const BatchSpec& batch) {
  if (!is_known_proxy(name)) {
    throw Error(ErrorKind::kUsage, "unknown proxy \"" + std::string(name) + "\"");
  }
  std::vector<ProxyReport> out(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    out[i] = score_proxy(name, configs[i], init_seed_for(configs[i], policy, seed), batch);
  });
  return out;
}

std::vector<std::size_t> rank_reports(std::span<const ProxyReport> reports, std::size_t k) {
  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (reports[a].score != reports[b].score) return reports[a].score > reports[b].score;
    return reports[a].config_hash < reports[b].config_hash;
  });
  order.resize(std::min(k, order.size()));
  return order;
}

std::string to_jsonl(const ProxyReport& r) {
  json j;
  j["config_hash"] = hex16(r.config_hash);
  j["proxy"] = r.proxy_name;
  j["score"] = r.score;
  j["d_msa"] = r.d_msa_per_layer;
  j["s_mlp"] = r.s_mlp_per_layer;
  j["params"] = r.param_count;
  j["elapsed_ms"] = r.elapsed_ms;
  j["config"] = json::parse(encode(r.config));
  return j.dump();
}

ProxyReport parse_report(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("report JSON: ") + e.what());
  }
  for (const char* key : {"config_hash", "proxy", "score", "d_msa", "s_mlp", "params", "elapsed_ms", "config"}) {
    if (!j.contains(key)) throw Error(ErrorKind::kMissingField, std::string("report is missing field \"") + key + "\"");
  }
  try {
    ProxyReport r;
    const std::string hash = j.at("config_hash").get<std::string>();
    if (hash.size() != 16) throw Error(ErrorKind::kMalformedJson, "config_hash must be 16 hex digits");
    r.config_hash = std::stoull(hash, nullptr, 16);
    r.proxy_name = j.at("proxy").get<std::string>();
    r.score = j.at("score").get<double>();
    r.d_msa_per_layer = j.at("d_msa").get<std::vector<double>>();
    r.s_mlp_per_layer = j.at("s_mlp").get<std::vector<double>>();
    r.param_count = j.at("params").get<std::uint64_t>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    r.config = decode(j.at("config").dump());
    if (config_hash(r.config) != r.config_hash) {
      throw Error(ErrorKind::kInvariant, "config_hash does not match the embedded config");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedJson, std::string("report JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::kMalformedJson, "config_hash is not hexadecimal");
  }
}

}  // namespace zerovit
