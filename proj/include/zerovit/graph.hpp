#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "zerovit/tensor.hpp"

namespace zerovit {

enum class Primitive : std::uint8_t {
  kLeaf,
  kMatmul,     // [..., m, k] x [..., k, n]; a rank-2 side broadcasts over the other's batch
  kAdd,        // equal shapes, or one shape a suffix of the other
  kMul,        // same broadcasting rule as kAdd
  kScale,      // attrs.scalar
  kTranspose,  // swaps the last two axes
  kReshape,    // attrs.shape
  kSoftmax,    // last axis
  kGelu,       // tanh approximation
  kLayerNorm,  // inputs (x, gamma, beta), last axis, attrs.eps
  kAbs,
  kSum,        // global, output shape [1]
  kSlice,      // attrs.axis, [attrs.begin, attrs.end)
  kConcat,     // attrs.axis, any number of inputs
  kCrossEntropy,  // logits [B, C], attrs.labels; mean negative log-likelihood, shape [1]
};

std::string_view to_string(Primitive p);

struct NodeId {
  std::uint32_t index = 0;
  bool operator==(const NodeId&) const = default;
};

struct Attrs {
  double scalar = 1.0;
  double eps = 1e-6;
  int axis = -1;
  std::size_t begin = 0;
  std::size_t end = 0;
  Shape shape;
  std::vector<std::size_t> labels;
};

/// Append-only computation record supporting one reverse sweep.
///
/// Every node owns its output tensor; the gradient of the loss with respect
/// to a node lands in that tensor's grad slot during backward(). Nodes are
/// only differentiated when some leaf upstream of them requires a gradient.
class Graph {
 public:
  NodeId input(Tensor value, bool requires_grad = false);
  NodeId evaluate(Primitive primitive, std::span<const NodeId> inputs, const Attrs& attrs = {});
  NodeId evaluate(Primitive primitive, std::initializer_list<NodeId> inputs,
                  const Attrs& attrs = {}) {
    return evaluate(primitive, std::span<const NodeId>(inputs.begin(), inputs.size()), attrs);
  }

  // Seeds d(loss)/d(loss) = 1 and propagates in reverse append order.
  void backward(NodeId loss);

  const Tensor& tensor(NodeId id) const { return nodes_.at(id.index).value; }
  Tensor& tensor(NodeId id) { return nodes_.at(id.index).value; }
  Primitive primitive(NodeId id) const { return nodes_.at(id.index).primitive; }
  bool requires_grad(NodeId id) const { return nodes_.at(id.index).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Primitive primitive = Primitive::kLeaf;
    std::vector<NodeId> inputs;
    Attrs attrs;
    Tensor value;
    std::vector<double> saved;  // per-primitive forward state (layernorm stats, probabilities)
    bool requires_grad = false;
  };

  void check_input(NodeId id) const;
  void propagate(const Node& node);

  std::vector<Node> nodes_;
};

namespace ops {

NodeId matmul(Graph& g, NodeId a, NodeId b);
NodeId add(Graph& g, NodeId a, NodeId b);
NodeId mul(Graph& g, NodeId a, NodeId b);
NodeId scale(Graph& g, NodeId x, double factor);
NodeId transpose(Graph& g, NodeId x);
NodeId reshape(Graph& g, NodeId x, Shape shape);
NodeId softmax(Graph& g, NodeId x);
NodeId gelu(Graph& g, NodeId x);
NodeId layer_norm(Graph& g, NodeId x, NodeId gamma, NodeId beta, double eps = 1e-6);
NodeId abs(Graph& g, NodeId x);
NodeId sum(Graph& g, NodeId x);
NodeId slice(Graph& g, NodeId x, int axis, std::size_t begin, std::size_t end);
NodeId concat(Graph& g, std::span<const NodeId> parts, int axis);
NodeId cross_entropy(Graph& g, NodeId logits, std::vector<std::size_t> labels);

}  // namespace ops

}  // namespace zerovit
