#pragma once

// Oracles shared by the unit and acceptance suites. Everything here is
// deliberately naive and independent of the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "zerovit/arch.hpp"
#include "zerovit/graph.hpp"
#include "zerovit/tensor.hpp"

namespace zerovit::testing {

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double stddev = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, stddev);
  for (double& v : t.data()) v = n(rng);
  return t;
}

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
// gradient is zero from dividing round-off by round-off.
inline double rel_err(double analytic, double numeric, double floor = 1e-7) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

/// Builds a scalar loss from leaves holding `inputs`.
using LossBuilder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

struct GradCheck {
  double max_rel_err = 0.0;
  std::size_t checked = 0;
};

inline double eval_loss(const LossBuilder& build, const std::vector<Tensor>& inputs) {
  Graph g;
  std::vector<NodeId> leaves;
  for (const Tensor& t : inputs) leaves.push_back(g.input(t, true));
  return g.tensor(build(g, leaves))[0];
}

// Central differences with step h against one backward pass, over every
// entry of every input.
inline GradCheck check_gradients(const LossBuilder& build, std::vector<Tensor> inputs, double h = 1e-5,
                                 double floor = 1e-7) {
  Graph g;
  std::vector<NodeId> leaves;
  for (const Tensor& t : inputs) leaves.push_back(g.input(t, true));
  g.backward(build(g, leaves));

  GradCheck out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor& leaf = g.tensor(leaves[i]);
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double original = inputs[i][j];
      inputs[i][j] = original + h;
      const double up = eval_loss(build, inputs);
      inputs[i][j] = original - h;
      const double down = eval_loss(build, inputs);
      inputs[i][j] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = leaf.has_grad() ? leaf.grad()[j] : 0.0;
      out.max_rel_err = std::max(out.max_rel_err, rel_err(analytic, numeric, floor));
      ++out.checked;
    }
  }
  return out;
}

struct PairCounts {
  std::int64_t concordant = 0, discordant = 0, tie_x_only = 0, tie_y_only = 0, tie_both = 0;
};

inline PairCounts count_pairs(std::span<const double> xs, std::span<const double> ys) {
  PairCounts c;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
      if (dx == 0 && dy == 0) ++c.tie_both;
      else if (dx == 0) ++c.tie_x_only;
      else if (dy == 0) ++c.tie_y_only;
      else if ((dx > 0) == (dy > 0)) ++c.concordant;
      else ++c.discordant;
    }
  }
  return c;
}

// Kendall tau-b from exhaustive pair enumeration.
inline double brute_force_tau(std::span<const double> xs, std::span<const double> ys) {
  const PairCounts c = count_pairs(xs, ys);
  const std::int64_t num = c.concordant - c.discordant;
  const std::int64_t den_x = c.concordant + c.discordant + c.tie_x_only;
  const std::int64_t den_y = c.concordant + c.discordant + c.tie_y_only;
  return static_cast<double>(num) / std::sqrt(static_cast<double>(den_y) * static_cast<double>(den_x));
}

// Parameter count by listing every tensor shape of the architecture.
inline std::uint64_t enumerate_param_count(const ArchConfig& c) {
  std::vector<std::vector<std::uint64_t>> shapes;
  const std::uint64_t d = c.embed_dim, p = c.patch_size;
  const std::uint64_t grid = c.img_size / c.patch_size;
  shapes.push_back({3 * p * p, d});
  shapes.push_back({d});
  shapes.push_back({1, d});
  shapes.push_back({grid * grid + 1, d});
  for (int l = 0; l < c.depth; ++l) {
    const auto hidden = static_cast<std::uint64_t>(std::llround(c.embed_dim * c.mlp_ratio[l]));
    shapes.push_back({d});
    shapes.push_back({d});
    for (int m = 0; m < 3; ++m) {
      shapes.push_back({d, d});
      if (c.qkv_bias) shapes.push_back({d});
    }
    shapes.push_back({d, d});
    shapes.push_back({d});
    shapes.push_back({d});
    shapes.push_back({d});
    shapes.push_back({d, hidden});
    shapes.push_back({hidden});
    shapes.push_back({hidden, d});
    shapes.push_back({d});
  }
  shapes.push_back({d});
  shapes.push_back({d});
  shapes.push_back({d, static_cast<std::uint64_t>(c.num_classes)});
  shapes.push_back({static_cast<std::uint64_t>(c.num_classes)});
  std::uint64_t total = 0;
  for (const auto& s : shapes) {
    std::uint64_t n = 1;
    for (auto e : s) n *= e;
    total += n;
  }
  return total;
}

inline ArchConfig tiny_config(int embed = 8, int depth = 1) {
  ArchConfig c;
  c.img_size = 8;
  c.patch_size = 4;
  c.num_classes = 3;
  c.embed_dim = embed;
  c.depth = depth;
  c.heads.assign(depth, 2);
  c.mlp_ratio.assign(depth, 2.0);
  c.qkv_bias = true;
  return c;
}

// sum(y * R) for a fixed random R, so that no primitive gets a trivially
// symmetric upstream gradient (plain sum of a softmax is constant).
inline NodeId weighted_sum(Graph& g, NodeId y, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  const NodeId r = g.input(random_tensor(rng, g.tensor(y).shape()));
  return ops::sum(g, ops::mul(g, y, r));
}

struct PrimitiveCase {
  const char* name;
  std::vector<Shape> shapes;
  LossBuilder build;
};

// One scalar loss per differentiable primitive.
inline std::vector<PrimitiveCase> primitive_cases() {
  return {
      {"matmul_2d", {{3, 4}, {4, 2}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::matmul(g, in[0], in[1]));
       }},
      {"matmul_batched_shared_rhs", {{2, 3, 4}, {4, 3}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::matmul(g, in[0], in[1]));
       }},
      {"matmul_batched_both", {{2, 3, 4}, {2, 4, 2}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::matmul(g, in[0], in[1]));
       }},
      {"matmul_shared_lhs", {{3, 4}, {2, 4, 2}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::matmul(g, in[0], in[1]));
       }},
      {"add_broadcast", {{2, 3, 4}, {3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::add(g, in[0], in[1]));
       }},
      {"mul_broadcast", {{4}, {2, 3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::mul(g, in[0], in[1]));
       }},
      {"scale", {{3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::scale(g, in[0], -0.75));
       }},
      {"transpose", {{2, 3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::transpose(g, in[0]));
       }},
      {"reshape", {{2, 3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::reshape(g, in[0], {4, 6}));
       }},
      {"softmax", {{2, 3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::softmax(g, in[0]));
       }},
      {"gelu", {{4, 4, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::gelu(g, in[0]));
       }},
      {"layernorm", {{3, 4}, {4}, {4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::layer_norm(g, in[0], in[1], in[2]));
       }},
      {"abs", {{4, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::abs(g, in[0]));
       }},
      {"sum", {{2, 2, 3}}, [](Graph& g, const std::vector<NodeId>& in) {
         return ops::scale(g, ops::sum(g, ops::mul(g, in[0], in[0])), 0.5);
       }},
      {"slice", {{2, 4, 3}}, [](Graph& g, const std::vector<NodeId>& in) {
         return weighted_sum(g, ops::slice(g, in[0], 1, 1, 3));
       }},
      {"concat", {{2, 1, 3}, {2, 2, 3}}, [](Graph& g, const std::vector<NodeId>& in) {
         const NodeId parts[] = {in[0], in[1]};
         return weighted_sum(g, ops::concat(g, parts, 1));
       }},
      {"cross_entropy", {{3, 4}}, [](Graph& g, const std::vector<NodeId>& in) {
         return ops::cross_entropy(g, in[0], {0, 3, 1});
       }},
  };
}

}  // namespace zerovit::testing
