#include "zerovit/vit.hpp"

#include <algorithm>
#include <cmath>

#include "zerovit/error.hpp"
#include "zerovit/random.hpp"

namespace zerovit {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kInitBound = 2.0 * kInitStd;
constexpr double kLayerNormEps = 1e-6;

class ParamBuilder {
 public:
  ParamBuilder(Model& model, Rng& rng) : model_(model), rng_(rng) {}

  void random(ModuleTag tag, int layer, ParamRole role, Shape shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = truncated_normal(rng_, kInitStd, kInitBound);
    model_.params.push_back({tag, layer, role, std::move(t)});
  }

  void constant(ModuleTag tag, int layer, ParamRole role, Shape shape, double value) {
    model_.params.push_back({tag, layer, role, Tensor(std::move(shape), value)});
  }

  void norm(int layer, std::size_t dim) {
    constant(ModuleTag::kNorm, layer, ParamRole::kLnGamma, {dim}, 1.0);
    constant(ModuleTag::kNorm, layer, ParamRole::kLnBeta, {dim}, 0.0);
  }

 private:
  Model& model_;
  Rng& rng_;
};

// Walks the parameter list in materialization order.
class ParamCursor {
 public:
  ParamCursor(const Model& model, const std::vector<NodeId>& nodes) : model_(model), nodes_(nodes) {}

  NodeId next(ParamRole expected) {
    const TaggedParam& p = model_.params.at(index_);
    if (p.role != expected) {
      throw Error(ErrorKind::kUsage, "model parameter " + std::to_string(index_) + " has role " +
                                         std::string(to_string(p.role)) + ", expected " +
                                         std::string(to_string(expected)));
    }
    return nodes_[index_++];
  }

 private:
  const Model& model_;
  const std::vector<NodeId>& nodes_;
  std::size_t index_ = 0;
};

NodeId linear(Graph& g, NodeId x, NodeId weight, const NodeId* bias) {
  NodeId y = ops::matmul(g, x, weight);
  return bias ? ops::add(g, y, *bias) : y;
}

}  // namespace

std::string_view to_string(ModuleTag tag) {
  switch (tag) {
    case ModuleTag::kMsa: return "MSA";
    case ModuleTag::kMlp: return "MLP";
    case ModuleTag::kEmbed: return "EMBED";
    case ModuleTag::kHead: return "HEAD";
    case ModuleTag::kNorm: return "NORM";
  }
  return "?";
}

std::string_view to_string(ParamRole role) {
  switch (role) {
    case ParamRole::kWq: return "Wq";
    case ParamRole::kWk: return "Wk";
    case ParamRole::kWv: return "Wv";
    case ParamRole::kWproj: return "Wproj";
    case ParamRole::kWfc1: return "Wfc1";
    case ParamRole::kWfc2: return "Wfc2";
    case ParamRole::kBias: return "bias";
    case ParamRole::kPatchProj: return "patch_proj";
    case ParamRole::kClsToken: return "cls_token";
    case ParamRole::kPosEmbed: return "pos_embed";
    case ParamRole::kLnGamma: return "ln_gamma";
    case ParamRole::kLnBeta: return "ln_beta";
    case ParamRole::kClassifier: return "classifier";
  }
  return "?";
}

bool TaggedParam::is_weight_matrix() const {
  switch (role) {
    case ParamRole::kWq:
    case ParamRole::kWk:
    case ParamRole::kWv:
    case ParamRole::kWproj:
    case ParamRole::kWfc1:
    case ParamRole::kWfc2:
    case ParamRole::kPatchProj:
    case ParamRole::kClassifier:
      return true;
    default:
      return false;
  }
}

std::uint64_t Model::param_count() const {
  std::uint64_t n = 0;
  for (const TaggedParam& p : params) n += p.tensor.size();
  return n;
}

Model materialize(const ArchConfig& config, std::uint64_t seed) {
  validate(config);
  Model model;
  model.config = config;
  model.init_seed = seed;
  Rng rng(seed);
  ParamBuilder b(model, rng);

  const std::size_t d = config.embed_dim;
  const std::size_t patch_in = 3 * static_cast<std::size_t>(config.patch_size * config.patch_size);
  const std::size_t tokens = num_patches(config) + 1;

  b.random(ModuleTag::kEmbed, -1, ParamRole::kPatchProj, {patch_in, d});
  b.constant(ModuleTag::kEmbed, -1, ParamRole::kBias, {d}, 0.0);
  b.random(ModuleTag::kEmbed, -1, ParamRole::kClsToken, {1, d});
  b.random(ModuleTag::kEmbed, -1, ParamRole::kPosEmbed, {tokens, d});

  for (int l = 0; l < config.depth; ++l) {
    const std::size_t hidden = mlp_hidden(config, l);
    b.norm(l, d);
    for (ParamRole role : {ParamRole::kWq, ParamRole::kWk, ParamRole::kWv}) {
      b.random(ModuleTag::kMsa, l, role, {d, d});
      if (config.qkv_bias) b.constant(ModuleTag::kMsa, l, ParamRole::kBias, {d}, 0.0);
    }
    b.random(ModuleTag::kMsa, l, ParamRole::kWproj, {d, d});
    b.constant(ModuleTag::kMsa, l, ParamRole::kBias, {d}, 0.0);
    b.norm(l, d);
    b.random(ModuleTag::kMlp, l, ParamRole::kWfc1, {d, hidden});
    b.constant(ModuleTag::kMlp, l, ParamRole::kBias, {hidden}, 0.0);
    b.random(ModuleTag::kMlp, l, ParamRole::kWfc2, {hidden, d});
    b.constant(ModuleTag::kMlp, l, ParamRole::kBias, {d}, 0.0);
  }

  b.norm(-1, d);
  b.random(ModuleTag::kHead, -1, ParamRole::kClassifier, {d, static_cast<std::size_t>(config.num_classes)});
  b.constant(ModuleTag::kHead, -1, ParamRole::kBias, {static_cast<std::size_t>(config.num_classes)}, 0.0);
  return model;
}

Tensor all_ones_input(const ArchConfig& config) {
  const std::size_t side = config.img_size;
  return Tensor({3, side, side}, 1.0);
}

namespace {

template <typename ModelT, typename Ptr>
std::vector<Ptr> filter_params(ModelT& model, const ParamFilter& filter) {
  std::vector<Ptr> out;
  for (auto& p : model.params) {
    if (!filter.tags.empty() &&
        std::find(filter.tags.begin(), filter.tags.end(), p.tag) == filter.tags.end()) {
      continue;
    }
    if (filter.weight_matrices_only && !p.is_weight_matrix()) continue;
    out.push_back(&p);
  }
  return out;
}

}  // namespace

std::vector<const TaggedParam*> tagged_params(const Model& model, const ParamFilter& filter) {
  return filter_params<const Model, const TaggedParam*>(model, filter);
}

std::vector<TaggedParam*> tagged_params(Model& model, const ParamFilter& filter) {
  return filter_params<Model, TaggedParam*>(model, filter);
}

Tensor patchify(const Tensor& images, int patch_size) {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != images.dim(3) ||
      images.dim(2) % patch_size != 0) {
    throw Error(ErrorKind::kShape, "patchify: expected [B, 3, S, S] with S divisible by " +
                                       std::to_string(patch_size) + ", got " +
                                       to_string(images.shape()));
  }
  const std::size_t batch = images.dim(0), side = images.dim(2), p = patch_size;
  const std::size_t grid = side / p;
  const std::size_t feat = 3 * p * p;
  Tensor out({batch, grid * grid, feat});
  const auto src = images.data();
  auto dst = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t gy = 0; gy < grid; ++gy) {
      for (std::size_t gx = 0; gx < grid; ++gx) {
        double* row = dst.data() + ((b * grid + gy) * grid + gx) * feat;
        for (std::size_t c = 0; c < 3; ++c) {
          for (std::size_t py = 0; py < p; ++py) {
            const double* line = src.data() + ((b * 3 + c) * side + gy * p + py) * side + gx * p;
            std::copy_n(line, p, row + (c * p + py) * p);
          }
        }
      }
    }
  }
  return out;
}

ForwardPass forward_batch(const Model& model, const Tensor& images) {
  const ArchConfig& cfg = model.config;
  const std::size_t side = cfg.img_size;
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != side || images.dim(3) != side) {
    throw Error(ErrorKind::kShape, "forward: expected images [B, 3, " + std::to_string(side) + ", " +
                                       std::to_string(side) + "], got " + to_string(images.shape()));
  }
  const std::size_t batch = images.dim(0);
  const std::size_t d = cfg.embed_dim;
  ForwardPass fp;
  Graph& g = fp.graph;
  fp.param_nodes.reserve(model.params.size());
  for (const TaggedParam& p : model.params) fp.param_nodes.push_back(g.input(p.tensor, true));
  ParamCursor next(model, fp.param_nodes);

  const NodeId patches = g.input(patchify(images, cfg.patch_size));
  const NodeId w_patch = next.next(ParamRole::kPatchProj);
  const NodeId b_patch = next.next(ParamRole::kBias);
  const NodeId cls = next.next(ParamRole::kClsToken);
  const NodeId pos = next.next(ParamRole::kPosEmbed);

  const NodeId embedded = linear(g, patches, w_patch, &b_patch);
  const NodeId cls_rows = ops::add(g, g.input(Tensor({batch, 1, d})), cls);
  const NodeId seq[] = {cls_rows, embedded};
  NodeId x = ops::add(g, ops::concat(g, seq, 1), pos);

  for (int l = 0; l < cfg.depth; ++l) {
    const std::size_t heads = cfg.heads[l];
    const std::size_t head_dim = d / heads;

    const NodeId g1 = next.next(ParamRole::kLnGamma);
    const NodeId be1 = next.next(ParamRole::kLnBeta);
    const NodeId h = ops::layer_norm(g, x, g1, be1, kLayerNormEps);

    NodeId qkv[3];
    const ParamRole roles[3] = {ParamRole::kWq, ParamRole::kWk, ParamRole::kWv};
    for (int i = 0; i < 3; ++i) {
      const NodeId w = next.next(roles[i]);
      if (cfg.qkv_bias) {
        const NodeId bias = next.next(ParamRole::kBias);
        qkv[i] = linear(g, h, w, &bias);
      } else {
        qkv[i] = linear(g, h, w, nullptr);
      }
    }

    std::vector<NodeId> head_out;
    head_out.reserve(heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const std::size_t lo = hd * head_dim, hi = lo + head_dim;
      const NodeId q = ops::slice(g, qkv[0], -1, lo, hi);
      const NodeId k = ops::slice(g, qkv[1], -1, lo, hi);
      const NodeId v = ops::slice(g, qkv[2], -1, lo, hi);
      const NodeId scores = ops::scale(g, ops::matmul(g, q, ops::transpose(g, k)), scale);
      const NodeId attn = ops::softmax(g, scores);
      fp.attention.push_back(attn);
      head_out.push_back(ops::matmul(g, attn, v));
    }
    const NodeId merged = heads == 1 ? head_out.front() : ops::concat(g, head_out, -1);
    const NodeId w_proj = next.next(ParamRole::kWproj);
    const NodeId b_proj = next.next(ParamRole::kBias);
    x = ops::add(g, x, linear(g, merged, w_proj, &b_proj));

    const NodeId g2 = next.next(ParamRole::kLnGamma);
    const NodeId be2 = next.next(ParamRole::kLnBeta);
    const NodeId h2 = ops::layer_norm(g, x, g2, be2, kLayerNormEps);
    const NodeId w1 = next.next(ParamRole::kWfc1);
    const NodeId b1 = next.next(ParamRole::kBias);
    const NodeId w2 = next.next(ParamRole::kWfc2);
    const NodeId b2 = next.next(ParamRole::kBias);
    const NodeId hidden = ops::gelu(g, linear(g, h2, w1, &b1));
    x = ops::add(g, x, linear(g, hidden, w2, &b2));
  }

  const NodeId gf = next.next(ParamRole::kLnGamma);
  const NodeId bf = next.next(ParamRole::kLnBeta);
  const NodeId normed = ops::layer_norm(g, x, gf, bf, kLayerNormEps);
  const NodeId cls_out = ops::reshape(g, ops::slice(g, normed, 1, 0, 1), {batch, d});
  const NodeId w_head = next.next(ParamRole::kClassifier);
  const NodeId b_head = next.next(ParamRole::kBias);
  fp.logits = linear(g, cls_out, w_head, &b_head);
  return fp;
}

ForwardPass forward_classify(const Model& model, const Tensor& image) {
  if (image.rank() != 3) {
    throw Error(ErrorKind::kShape, "forward_classify: expected image [3, H, W], got " +
                                       to_string(image.shape()));
  }
  Tensor batched = image;
  batched.clear_grad();
  batched.reshape({1, image.dim(0), image.dim(1), image.dim(2)});
  ForwardPass fp = forward_batch(model, batched);
  fp.logits = ops::reshape(fp.graph, fp.logits, {static_cast<std::size_t>(model.config.num_classes)});
  return fp;
}

}  // namespace zerovit
