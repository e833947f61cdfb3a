#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "zerovit/arch.hpp"
#include "zerovit/graph.hpp"
#include "zerovit/tensor.hpp"

namespace zerovit {

enum class ModuleTag : std::uint8_t { kMsa, kMlp, kEmbed, kHead, kNorm };

enum class ParamRole : std::uint8_t {
  kWq,
  kWk,
  kWv,
  kWproj,
  kWfc1,
  kWfc2,
  kBias,
  kPatchProj,
  kClsToken,
  kPosEmbed,
  kLnGamma,
  kLnBeta,
  kClassifier,
};

std::string_view to_string(ModuleTag tag);
std::string_view to_string(ParamRole role);

struct TaggedParam {
  ModuleTag tag;
  int layer_index;  // -1 outside the transformer blocks
  ParamRole role;
  Tensor tensor;

  // Weight matrices proper: the MSA/MLP projections, patch projection and
  // classifier. Biases, norms and embeddings are not.
  bool is_weight_matrix() const;
};

struct Model {
  ArchConfig config;
  std::vector<TaggedParam> params;
  std::uint64_t init_seed = 0;

  std::uint64_t param_count() const;
};

// Weights ~ truncated normal(0, 0.02) clipped at +-0.04, class token and
// positional embedding likewise; biases and LN betas zero, LN gammas one.
Model materialize(const ArchConfig& config, std::uint64_t seed);

Tensor all_ones_input(const ArchConfig& config);

struct ParamFilter {
  std::vector<ModuleTag> tags;  // empty: any tag
  bool weight_matrices_only = false;
};

// Stable order: blocks ascending, roles Wq, Wk, Wv, Wproj then Wfc1, Wfc2.
std::vector<const TaggedParam*> tagged_params(const Model& model, const ParamFilter& filter = {});
std::vector<TaggedParam*> tagged_params(Model& model, const ParamFilter& filter = {});

/// A forward pass recorded on its own graph. `param_nodes[i]` is the leaf
/// holding a copy of `model.params[i]`.
struct ForwardPass {
  Graph graph;
  std::vector<NodeId> param_nodes;
  NodeId logits;
  std::vector<NodeId> attention;  // every softmax over attention scores
};

// image: [3, H, W]. Logits have shape [num_classes].
ForwardPass forward_classify(const Model& model, const Tensor& image);
// images: [B, 3, H, W]. Logits have shape [B, num_classes].
ForwardPass forward_batch(const Model& model, const Tensor& images);

// Rearranges [B, 3, H, W] into [B, patches, 3 * p * p], patches in
// row-major grid order, features ordered (channel, row, col).
Tensor patchify(const Tensor& images, int patch_size);

}  // namespace zerovit
