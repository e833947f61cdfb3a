#include "zerovit/graph.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "zerovit/error.hpp"

namespace zerovit {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

[[noreturn]] void shape_error(Primitive p, const Shape& a, const Shape& b, const std::string& why) {
  throw Error(ErrorKind::kShape, std::string(to_string(p)) + ": " + why + " (" + to_string(a) +
                                     " vs " + to_string(b) + ")");
}

std::size_t normalize_axis(Primitive p, int axis, const Shape& shape) {
  const int rank = static_cast<int>(shape.size());
  const int resolved = axis < 0 ? axis + rank : axis;
  if (resolved < 0 || resolved >= rank) {
    throw Error(ErrorKind::kShape, std::string(to_string(p)) + ": axis " + std::to_string(axis) +
                                       " out of range for shape " + to_string(shape));
  }
  return static_cast<std::size_t>(resolved);
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// Shape of an elementwise binary result under leading-axis broadcasting.
Shape broadcast_shape(Primitive p, const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (is_suffix(b, a)) return a;
  if (is_suffix(a, b)) return b;
  shape_error(p, a, b, "operands do not broadcast over leading axes");
}

struct MatmulPlan {
  std::size_t m, k, n;
  std::size_t batch;   // output batch count
  bool a_shared;       // a is rank 2 and reused for every batch
  bool b_shared;
  Shape out;
};

MatmulPlan plan_matmul(const Shape& a, const Shape& b) {
  constexpr auto p = Primitive::kMatmul;
  if (a.size() < 2 || b.size() < 2) shape_error(p, a, b, "operands must have rank >= 2");
  MatmulPlan plan{};
  plan.m = a[a.size() - 2];
  plan.k = a.back();
  plan.n = b.back();
  if (b[b.size() - 2] != plan.k) shape_error(p, a, b, "inner dimensions differ");
  const Shape lead_a(a.begin(), a.end() - 2);
  const Shape lead_b(b.begin(), b.end() - 2);
  plan.a_shared = lead_a.empty() && !lead_b.empty();
  plan.b_shared = lead_b.empty();
  if (!plan.a_shared && !plan.b_shared && lead_a != lead_b) {
    shape_error(p, a, b, "batch dimensions differ");
  }
  plan.out = plan.b_shared ? lead_a : lead_b;
  plan.batch = numel(plan.out);
  plan.out.push_back(plan.m);
  plan.out.push_back(plan.n);
  return plan;
}

void matmul_forward(const MatmulPlan& plan, const double* a, const double* b, double* c) {
  const std::size_t m = plan.m, k = plan.k, n = plan.n;
  if (plan.b_shared) {
    // Fold the batch of a into its rows: one GEMM.
    MutMap(c, plan.batch * m, n).noalias() = ConstMap(a, plan.batch * m, k) * ConstMap(b, k, n);
    return;
  }
  for (std::size_t i = 0; i < plan.batch; ++i) {
    const double* ai = plan.a_shared ? a : a + i * m * k;
    MutMap(c + i * m * n, m, n).noalias() = ConstMap(ai, m, k) * ConstMap(b + i * k * n, k, n);
  }
}

void matmul_backward(const MatmulPlan& plan, const double* a, const double* b, const double* dc,
                     double* da, double* db) {
  const std::size_t m = plan.m, k = plan.k, n = plan.n;
  if (plan.b_shared) {
    const std::size_t rows = plan.batch * m;
    if (da) MutMap(da, rows, k).noalias() += ConstMap(dc, rows, n) * ConstMap(b, k, n).transpose();
    if (db) MutMap(db, k, n).noalias() += ConstMap(a, rows, k).transpose() * ConstMap(dc, rows, n);
    return;
  }
  for (std::size_t i = 0; i < plan.batch; ++i) {
    const double* ai = plan.a_shared ? a : a + i * m * k;
    const double* bi = b + i * k * n;
    const double* dci = dc + i * m * n;
    if (da) {
      double* dai = plan.a_shared ? da : da + i * m * k;
      MutMap(dai, m, k).noalias() += ConstMap(dci, m, n) * ConstMap(bi, k, n).transpose();
    }
    if (db) MutMap(db + i * k * n, k, n).noalias() += ConstMap(ai, m, k).transpose() * ConstMap(dci, m, n);
  }
}

// Adds `src` (length = big) into `dst` (length = small, small divides big),
// summing over the repeated leading blocks.
void reduce_into(std::span<const double> src, std::span<double> dst) {
  const std::size_t block = dst.size();
  for (std::size_t off = 0; off < src.size(); off += block) {
    for (std::size_t j = 0; j < block; ++j) dst[j] += src[off + j];
  }
}

struct AxisSplit {
  std::size_t outer, extent, inner;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

std::string_view to_string(Primitive p) {
  switch (p) {
    case Primitive::kLeaf: return "leaf";
    case Primitive::kMatmul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kMul: return "mul";
    case Primitive::kScale: return "scale";
    case Primitive::kTranspose: return "transpose";
    case Primitive::kReshape: return "reshape";
    case Primitive::kSoftmax: return "softmax";
    case Primitive::kGelu: return "gelu";
    case Primitive::kLayerNorm: return "layernorm";
    case Primitive::kAbs: return "abs";
    case Primitive::kSum: return "sum";
    case Primitive::kSlice: return "slice";
    case Primitive::kConcat: return "concat";
    case Primitive::kCrossEntropy: return "cross_entropy";
  }
  return "unknown";
}

NodeId Graph::input(Tensor value, bool requires_grad) {
  if (!value.all_finite()) {
    throw Error(ErrorKind::kNumeric, "graph input " + std::to_string(nodes_.size()) +
                                         " contains non-finite values");
  }
  Node node;
  node.value = std::move(value);
  node.value.clear_grad();
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::check_input(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw Error(ErrorKind::kUsage, "node id " + std::to_string(id.index) + " is not in the graph");
  }
}

NodeId Graph::evaluate(Primitive primitive, std::span<const NodeId> inputs, const Attrs& attrs) {
  for (NodeId id : inputs) check_input(id);
  auto arity = [&](std::size_t expected) {
    if (inputs.size() != expected) {
      throw Error(ErrorKind::kUsage, std::string(to_string(primitive)) + " expects " +
                                         std::to_string(expected) + " inputs, got " +
                                         std::to_string(inputs.size()));
    }
  };
  auto in = [&](std::size_t i) -> const Tensor& { return nodes_[inputs[i].index].value; };

  Node node;
  node.primitive = primitive;
  node.inputs.assign(inputs.begin(), inputs.end());
  node.attrs = attrs;

  switch (primitive) {
    case Primitive::kLeaf:
      throw Error(ErrorKind::kUsage, "leaf nodes are created with Graph::input");

    case Primitive::kMatmul: {
      arity(2);
      const MatmulPlan plan = plan_matmul(in(0).shape(), in(1).shape());
      node.value = Tensor(plan.out);
      matmul_forward(plan, in(0).data().data(), in(1).data().data(), node.value.data().data());
      break;
    }

    case Primitive::kAdd:
    case Primitive::kMul: {
      arity(2);
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      node.value = Tensor(broadcast_shape(primitive, a.shape(), b.shape()));
      auto out = node.value.data();
      const auto av = a.data(), bv = b.data();
      const bool add = primitive == Primitive::kAdd;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = av[i % av.size()], y = bv[i % bv.size()];
        out[i] = add ? x + y : x * y;
      }
      break;
    }

    case Primitive::kScale: {
      arity(1);
      node.value = in(0);
      node.value.clear_grad();
      for (double& v : node.value.data()) v *= attrs.scalar;
      break;
    }

    case Primitive::kTranspose: {
      arity(1);
      const Tensor& x = in(0);
      if (x.rank() < 2) shape_error(primitive, x.shape(), {}, "rank must be >= 2");
      Shape s = x.shape();
      const std::size_t r = s[s.size() - 2], c = s.back();
      std::swap(s[s.size() - 2], s.back());
      node.value = Tensor(s);
      const std::size_t batch = x.size() / (r * c);
      for (std::size_t b = 0; b < batch; ++b) {
        MutMap(node.value.data().data() + b * r * c, c, r) =
            ConstMap(x.data().data() + b * r * c, r, c).transpose();
      }
      break;
    }

    case Primitive::kReshape: {
      arity(1);
      if (numel(attrs.shape) != in(0).size()) {
        shape_error(primitive, in(0).shape(), attrs.shape, "element count changes");
      }
      node.value = Tensor(attrs.shape, std::vector<double>(in(0).data().begin(), in(0).data().end()));
      break;
    }

    case Primitive::kSoftmax: {
      arity(1);
      node.value = in(0);
      node.value.clear_grad();
      const std::size_t d = node.value.shape().back();
      auto v = node.value.data();
      for (std::size_t off = 0; off < v.size(); off += d) {
        const double mx = *std::max_element(v.begin() + off, v.begin() + off + d);
        double z = 0.0;
        for (std::size_t j = 0; j < d; ++j) z += (v[off + j] = std::exp(v[off + j] - mx));
        for (std::size_t j = 0; j < d; ++j) v[off + j] /= z;
      }
      break;
    }

    case Primitive::kGelu: {
      arity(1);
      node.value = in(0);
      node.value.clear_grad();
      auto yv = node.value.data();
      node.saved.resize(yv.size());
      for (std::size_t j = 0; j < yv.size(); ++j) {
        const double x = yv[j];
        const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
        node.saved[j] = t;
        yv[j] = 0.5 * x * (1.0 + t);
      }
      break;
    }

    case Primitive::kLayerNorm: {
      arity(3);
      const Tensor& x = in(0);
      const std::size_t d = x.shape().back();
      if (in(1).shape() != Shape{d} || in(2).shape() != Shape{d}) {
        shape_error(primitive, x.shape(), in(1).shape(), "affine parameters must be [last axis]");
      }
      node.value = Tensor(x.shape());
      const std::size_t rows = x.size() / d;
      node.saved.resize(2 * rows);
      const auto xv = x.data(), gv = in(1).data(), bv = in(2).data();
      auto yv = node.value.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xv.data() + r * d;
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + attrs.eps);
        node.saved[2 * r] = mean;
        node.saved[2 * r + 1] = rstd;
        for (std::size_t j = 0; j < d; ++j) {
          yv[r * d + j] = (row[j] - mean) * rstd * gv[j] + bv[j];
        }
      }
      break;
    }

    case Primitive::kAbs: {
      arity(1);
      node.value = in(0);
      node.value.clear_grad();
      for (double& v : node.value.data()) v = std::fabs(v);
      break;
    }

    case Primitive::kSum: {
      arity(1);
      const auto v = in(0).data();
      node.value = Tensor::scalar(std::accumulate(v.begin(), v.end(), 0.0));
      break;
    }

    case Primitive::kSlice: {
      arity(1);
      const Tensor& x = in(0);
      const std::size_t axis = normalize_axis(primitive, attrs.axis, x.shape());
      if (attrs.begin >= attrs.end || attrs.end > x.dim(axis)) {
        throw Error(ErrorKind::kShape, "slice: range [" + std::to_string(attrs.begin) + ", " +
                                           std::to_string(attrs.end) + ") invalid for shape " +
                                           to_string(x.shape()));
      }
      node.attrs.axis = static_cast<int>(axis);
      Shape s = x.shape();
      s[axis] = attrs.end - attrs.begin;
      node.value = Tensor(s);
      const AxisSplit sp = split_at(x.shape(), axis);
      const std::size_t len = (attrs.end - attrs.begin) * sp.inner;
      for (std::size_t o = 0; o < sp.outer; ++o) {
        std::copy_n(x.data().begin() + (o * sp.extent + attrs.begin) * sp.inner, len,
                    node.value.data().begin() + o * len);
      }
      break;
    }

    case Primitive::kConcat: {
      if (inputs.empty()) throw Error(ErrorKind::kUsage, "concat: no inputs");
      const Shape& first = in(0).shape();
      const std::size_t axis = normalize_axis(primitive, attrs.axis, first);
      node.attrs.axis = static_cast<int>(axis);
      Shape s = first;
      s[axis] = 0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        Shape probe = in(i).shape();
        if (probe.size() != first.size()) shape_error(primitive, first, probe, "ranks differ");
        const std::size_t ext = probe[axis];
        probe[axis] = first[axis];
        if (probe != first) shape_error(primitive, first, in(i).shape(), "off-axis extents differ");
        s[axis] += ext;
      }
      node.value = Tensor(s);
      const AxisSplit out = split_at(s, axis);
      std::size_t offset = 0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const AxisSplit part = split_at(in(i).shape(), axis);
        const std::size_t len = part.extent * part.inner;
        for (std::size_t o = 0; o < out.outer; ++o) {
          std::copy_n(in(i).data().begin() + o * len, len,
                      node.value.data().begin() + (o * out.extent + offset) * out.inner);
        }
        offset += part.extent;
      }
      break;
    }

    case Primitive::kCrossEntropy: {
      arity(1);
      const Tensor& logits = in(0);
      if (logits.rank() != 2 || attrs.labels.size() != logits.dim(0)) {
        throw Error(ErrorKind::kShape, "cross_entropy: logits " + to_string(logits.shape()) +
                                           " do not match " + std::to_string(attrs.labels.size()) +
                                           " labels");
      }
      const std::size_t batch = logits.dim(0), classes = logits.dim(1);
      node.saved.assign(logits.data().begin(), logits.data().end());
      double loss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        if (attrs.labels[b] >= classes) {
          throw Error(ErrorKind::kShape, "cross_entropy: label " + std::to_string(attrs.labels[b]) +
                                             " out of range for " + std::to_string(classes) +
                                             " classes");
        }
        double* p = node.saved.data() + b * classes;
        const double mx = *std::max_element(p, p + classes);
        double z = 0.0;
        for (std::size_t c = 0; c < classes; ++c) z += std::exp(p[c] - mx);
        const double log_z = mx + std::log(z);
        loss -= p[attrs.labels[b]] - log_z;
        for (std::size_t c = 0; c < classes; ++c) p[c] = std::exp(p[c] - log_z);
      }
      node.value = Tensor::scalar(loss / static_cast<double>(batch));
      break;
    }
  }

  if (!node.value.all_finite()) {
    throw Error(ErrorKind::kNumeric, std::string(to_string(primitive)) + " at node " +
                                         std::to_string(nodes_.size()) +
                                         " produced a non-finite value");
  }
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                   [&](NodeId id) { return nodes_[id.index].requires_grad; });
  nodes_.push_back(std::move(node));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::backward(NodeId loss) {
  check_input(loss);
  Tensor& root = nodes_[loss.index].value;
  if (root.size() != 1) {
    throw Error(ErrorKind::kShape, "backward: loss must be scalar, got shape " + to_string(root.shape()));
  }
  root.grad()[0] += 1.0;

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.requires_grad || !node.value.has_grad()) continue;
    const auto g = node.value.grad();
    if (!all_finite(g)) {
      throw Error(ErrorKind::kNumeric, "non-finite gradient at node " + std::to_string(i) + " (" +
                                           std::string(to_string(node.primitive)) + ")");
    }
    if (node.primitive != Primitive::kLeaf) propagate(node);
  }
}

void Graph::propagate(const Node& node) {
  const auto dy = node.value.grad();
  // Returns the grad span of input i, or an empty span if it needs none.
  auto grad_of = [&](std::size_t i) -> std::span<double> {
    Node& src = nodes_[node.inputs[i].index];
    if (!src.requires_grad) return {};
    return src.value.grad();
  };
  auto val = [&](std::size_t i) -> const Tensor& { return nodes_[node.inputs[i].index].value; };

  switch (node.primitive) {
    case Primitive::kLeaf:
      break;

    case Primitive::kMatmul: {
      const MatmulPlan plan = plan_matmul(val(0).shape(), val(1).shape());
      auto da = grad_of(0);
      auto db = grad_of(1);
      matmul_backward(plan, val(0).data().data(), val(1).data().data(), dy.data(),
                      da.empty() ? nullptr : da.data(), db.empty() ? nullptr : db.data());
      break;
    }

    case Primitive::kAdd: {
      for (std::size_t i = 0; i < 2; ++i) {
        auto d = grad_of(i);
        if (!d.empty()) reduce_into(dy, d);
      }
      break;
    }

    case Primitive::kMul: {
      const auto av = val(0).data(), bv = val(1).data();
      for (std::size_t i = 0; i < 2; ++i) {
        auto d = grad_of(i);
        if (d.empty()) continue;
        const auto other = i == 0 ? bv : av;
        for (std::size_t j = 0; j < dy.size(); ++j) {
          d[j % d.size()] += dy[j] * other[j % other.size()];
        }
      }
      break;
    }

    case Primitive::kScale: {
      auto d = grad_of(0);
      if (!d.empty()) {
        for (std::size_t j = 0; j < dy.size(); ++j) d[j] += dy[j] * node.attrs.scalar;
      }
      break;
    }

    case Primitive::kTranspose: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const Shape& s = val(0).shape();
      const std::size_t r = s[s.size() - 2], c = s.back();
      const std::size_t batch = d.size() / (r * c);
      for (std::size_t b = 0; b < batch; ++b) {
        MutMap(d.data() + b * r * c, r, c) += ConstMap(dy.data() + b * r * c, c, r).transpose();
      }
      break;
    }

    case Primitive::kReshape: {
      auto d = grad_of(0);
      if (!d.empty()) {
        for (std::size_t j = 0; j < dy.size(); ++j) d[j] += dy[j];
      }
      break;
    }

    case Primitive::kSoftmax: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const auto y = node.value.data();
      const std::size_t n = node.value.shape().back();
      for (std::size_t off = 0; off < y.size(); off += n) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += dy[off + j] * y[off + j];
        for (std::size_t j = 0; j < n; ++j) d[off + j] += y[off + j] * (dy[off + j] - dot);
      }
      break;
    }

    case Primitive::kGelu: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const auto xv = val(0).data();
      for (std::size_t j = 0; j < dy.size(); ++j) {
        const double x = xv[j];
        const double t = node.saved[j];
        const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
        d[j] += dy[j] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
      }
      break;
    }

    case Primitive::kLayerNorm: {
      const auto xv = val(0).data(), gv = val(1).data();
      const std::size_t d = gv.size();
      const std::size_t rows = xv.size() / d;
      auto dx = grad_of(0);
      auto dgamma = grad_of(1);
      auto dbeta = grad_of(2);
      std::vector<double> xhat(d), dxhat(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const double mean = node.saved[2 * r], rstd = node.saved[2 * r + 1];
        const double* dyr = dy.data() + r * d;
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          xhat[j] = (xv[r * d + j] - mean) * rstd;
          dxhat[j] = dyr[j] * gv[j];
          mean_dxhat += dxhat[j];
          mean_dxhat_xhat += dxhat[j] * xhat[j];
          if (!dgamma.empty()) dgamma[j] += dyr[j] * xhat[j];
          if (!dbeta.empty()) dbeta[j] += dyr[j];
        }
        if (dx.empty()) continue;
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          dx[r * d + j] += rstd * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
        }
      }
      break;
    }

    case Primitive::kAbs: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const auto xv = val(0).data();
      for (std::size_t j = 0; j < dy.size(); ++j) {
        const double x = xv[j];
        d[j] += x > 0.0 ? dy[j] : (x < 0.0 ? -dy[j] : 0.0);
      }
      break;
    }

    case Primitive::kSum: {
      auto d = grad_of(0);
      for (double& v : d) v += dy[0];
      break;
    }

    case Primitive::kSlice: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const std::size_t axis = static_cast<std::size_t>(node.attrs.axis);
      const AxisSplit sp = split_at(val(0).shape(), axis);
      const std::size_t len = (node.attrs.end - node.attrs.begin) * sp.inner;
      for (std::size_t o = 0; o < sp.outer; ++o) {
        double* dst = d.data() + (o * sp.extent + node.attrs.begin) * sp.inner;
        const double* src = dy.data() + o * len;
        for (std::size_t j = 0; j < len; ++j) dst[j] += src[j];
      }
      break;
    }

    case Primitive::kConcat: {
      const std::size_t axis = static_cast<std::size_t>(node.attrs.axis);
      const AxisSplit out = split_at(node.value.shape(), axis);
      std::size_t offset = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        const AxisSplit part = split_at(val(i).shape(), axis);
        auto d = grad_of(i);
        if (!d.empty()) {
          const std::size_t len = part.extent * part.inner;
          for (std::size_t o = 0; o < out.outer; ++o) {
            const double* src = dy.data() + (o * out.extent + offset) * out.inner;
            for (std::size_t j = 0; j < len; ++j) d[o * len + j] += src[j];
          }
        }
        offset += part.extent;
      }
      break;
    }

    case Primitive::kCrossEntropy: {
      auto d = grad_of(0);
      if (d.empty()) break;
      const std::size_t batch = node.attrs.labels.size();
      const std::size_t classes = d.size() / batch;
      const double s = dy[0] / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < classes; ++c) {
          const double target = c == node.attrs.labels[b] ? 1.0 : 0.0;
          d[b * classes + c] += s * (node.saved[b * classes + c] - target);
        }
      }
      break;
    }
  }
}

namespace ops {

NodeId matmul(Graph& g, NodeId a, NodeId b) { return g.evaluate(Primitive::kMatmul, {a, b}); }
NodeId add(Graph& g, NodeId a, NodeId b) { return g.evaluate(Primitive::kAdd, {a, b}); }
NodeId mul(Graph& g, NodeId a, NodeId b) { return g.evaluate(Primitive::kMul, {a, b}); }

NodeId scale(Graph& g, NodeId x, double factor) {
  Attrs attrs;
  attrs.scalar = factor;
  return g.evaluate(Primitive::kScale, {x}, attrs);
}

NodeId transpose(Graph& g, NodeId x) { return g.evaluate(Primitive::kTranspose, {x}); }

NodeId reshape(Graph& g, NodeId x, Shape shape) {
  Attrs attrs;
  attrs.shape = std::move(shape);
  return g.evaluate(Primitive::kReshape, {x}, attrs);
}

NodeId softmax(Graph& g, NodeId x) { return g.evaluate(Primitive::kSoftmax, {x}); }
NodeId gelu(Graph& g, NodeId x) { return g.evaluate(Primitive::kGelu, {x}); }

NodeId layer_norm(Graph& g, NodeId x, NodeId gamma, NodeId beta, double eps) {
  Attrs attrs;
  attrs.eps = eps;
  return g.evaluate(Primitive::kLayerNorm, {x, gamma, beta}, attrs);
}

NodeId abs(Graph& g, NodeId x) { return g.evaluate(Primitive::kAbs, {x}); }
NodeId sum(Graph& g, NodeId x) { return g.evaluate(Primitive::kSum, {x}); }

NodeId slice(Graph& g, NodeId x, int axis, std::size_t begin, std::size_t end) {
  Attrs attrs;
  attrs.axis = axis;
  attrs.begin = begin;
  attrs.end = end;
  return g.evaluate(Primitive::kSlice, {x}, attrs);
}

NodeId concat(Graph& g, std::span<const NodeId> parts, int axis) {
  Attrs attrs;
  attrs.axis = axis;
  return g.evaluate(Primitive::kConcat, parts, attrs);
}

NodeId cross_entropy(Graph& g, NodeId logits, std::vector<std::size_t> labels) {
  Attrs attrs;
  attrs.labels = std::move(labels);
  return g.evaluate(Primitive::kCrossEntropy, {logits}, attrs);
}

}  // namespace ops

}  // namespace zerovit
