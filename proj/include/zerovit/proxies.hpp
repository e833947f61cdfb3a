#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zerovit/arch.hpp"
#include "zerovit/linalg.hpp"
#include "zerovit/vit.hpp"

namespace zerovit {

/// Score of one architecture under one proxy. For "dss" the score is the
/// sum of the per-block attention diversities followed by the per-block MLP
/// saliencies, accumulated left to right in that order.
struct ProxyReport {
  std::uint64_t config_hash = 0;
  std::string proxy_name;
  double score = 0.0;
  std::vector<double> d_msa_per_layer;
  std::vector<double> s_mlp_per_layer;
  std::uint64_t param_count = 0;
  double elapsed_ms = 0.0;
  ArchConfig config;
};

struct WeightGrad {
  linalg::Matrix weight;
  linalg::Matrix grad;
};

enum class SaliencyScope { kMsa, kMlp, kBoth };

/// Synthetic batch for the data-dependent baselines: standard normal images
/// and uniform labels drawn from `seed`, cross-entropy scaled by `loss_scale`.
struct BatchSpec {
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  double loss_scale = 1.0;
};

enum class SeedPolicy { kFixed, kConfigHash };

// Init seed for `config`: `seed` itself under kFixed, otherwise a stream
// derived from (seed, config_hash).
std::uint64_t init_seed_for(const ArchConfig& config, SeedPolicy policy, std::uint64_t seed);

// Replaces every parameter by its magnitude, runs the all-ones image
// forward, backpropagates the sum of the logits, then restores the signed
// parameters. Gradients stay in each parameter's grad slot.
void synflow_forward_backward(Model& model);

// Sum over (W, dL/dW) of nuclear(dL/dW) * nuclear(W). Expects exactly four
// pairs (Wq, Wk, Wv, Wproj).
double d_msa(std::span<const WeightGrad> block);
// Sum over (W, dL/dW) of sum_ij dL/dW_ij * W_ij. Expects exactly two pairs.
double s_mlp(std::span<const WeightGrad> block);

// (|W|, grad) pairs for one block and module, in role order. Requires the
// grads left by synflow_forward_backward.
std::vector<WeightGrad> linearized_pairs(const Model& model, int layer, ModuleTag tag);

ProxyReport dss_score(const ArchConfig& config, std::uint64_t seed);
// Scores an already-materialized (and possibly edited) model.
ProxyReport dss_score_model(Model& model);

double saliency_modular(const ArchConfig& config, std::uint64_t seed, SaliencyScope scope);
double saliency_modular_model(Model& model, SaliencyScope scope);

// One cross-entropy forward/backward of the signed model on the batch.
void batch_forward_backward(Model& model, const BatchSpec& batch);

double snip_score(const ArchConfig& config, std::uint64_t seed, const BatchSpec& batch = {});
double grad_norm_score(const ArchConfig& config, std::uint64_t seed, const BatchSpec& batch = {});

// Names accepted by score_proxy: dss, snip, gradnorm, saliency_msa,
// saliency_mlp, saliency_both, params (the parameter count).
const std::vector<std::string>& proxy_names();
bool is_known_proxy(std::string_view name);

ProxyReport score_proxy(std::string_view name, const ArchConfig& config, std::uint64_t seed,
                        const BatchSpec& batch = {});

// Reports are returned in input order regardless of `jobs`.
std::vector<ProxyReport> score_many(std::span<const ArchConfig> configs, std::string_view name,
                                    SeedPolicy policy, std::uint64_t seed, std::size_t jobs,
                                    const BatchSpec& batch = {});

// Indices of the best k reports: score descending, config_hash ascending,
// then input position.
std::vector<std::size_t> rank_reports(std::span<const ProxyReport> reports, std::size_t k);

std::string to_jsonl(const ProxyReport& report);
ProxyReport parse_report(std::string_view line);

}  // namespace zerovit
