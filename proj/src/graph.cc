// Copyright 2026 The Canopy Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "canopy/graph.h"

#include <algorithm>
#include <array>
#include <utility>

#include "canopy/error.h"

namespace canopy {
namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 12> kOpNames{{
    {OpKind::kInput, "input"},
    {OpKind::kConstant, "constant"},
    {OpKind::kConv2D, "conv2d"},
    {OpKind::kBatchNorm, "batch_norm"},
    {OpKind::kRelu, "relu"},
    {OpKind::kMaxPool, "max_pool"},
    {OpKind::kAvgPool, "avg_pool"},
    {OpKind::kGlobalAvgPool, "global_avg_pool"},
    {OpKind::kConcat, "concat"},
    {OpKind::kAdd, "add"},
    {OpKind::kFullyConnected, "fully_connected"},
    {OpKind::kSoftmax, "softmax"},
}};

[[noreturn]] void graph_error(const std::string& msg) {
  throw Error(ErrorCode::kInvalidGraph, msg);
}

std::string describe(const Node& node) {
  return "node " + std::to_string(node.id) + " '" + node.name + "' (" +
         std::string(op_kind_name(node.kind)) + ")";
}

// Expected input count; -1 means two or more.
int arity(OpKind kind) {
  switch (kind) {
    case OpKind::kInput:
    case OpKind::kConstant:
      return 0;
    case OpKind::kConcat:
      return -1;
    case OpKind::kAdd:
      return 2;
    default:
      return 1;
  }
}

std::vector<std::string_view> required_params(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return {"value"};
    case OpKind::kConv2D: return {"kernel"};
    case OpKind::kBatchNorm: return {"mean", "variance", "gamma", "beta"};
    case OpKind::kFullyConnected: return {"weights", "bias"};
    default: return {};
  }
}

BatchNormParams bn_params(const Node& node) {
  return {node.param("mean"), node.param("variance"), node.param("gamma"),
          node.param("beta"), node.attrs.epsilon};
}

ConvSpec conv_spec(const Node& node) {
  ConvSpec spec{node.param("kernel"), std::nullopt, node.attrs.stride,
                node.attrs.padding};
  if (const Param* b = node.find_param("bias")) spec.bias = b->value;
  return spec;
}

}  // namespace

std::string_view op_kind_name(OpKind kind) {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

OpKind op_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kInvalidGraph,
              "unknown op kind '" + std::string(name) + "'");
}

Tensor QuantizedTensor::dequantize() const {
  std::vector<double> data(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    data[i] = descriptor.scale * (static_cast<double>(values[i]) -
                                  static_cast<double>(descriptor.zero_point));
  }
  return Tensor(descriptor.shape, std::move(data));
}

const Param* Node::find_param(std::string_view param_name) const {
  for (const Param& p : params) {
    if (p.name == param_name) return &p;
  }
  return nullptr;
}

const Tensor& Node::param(std::string_view param_name) const {
  const Param* p = find_param(param_name);
  if (!p) {
    graph_error(describe(*this) + " has no parameter '" +
                std::string(param_name) + "'");
  }
  return p->value;
}

int CompGraph::add_node(Node node) {
  node.id = size();
  for (int in : node.inputs) {
    if (in < 0 || in >= node.id) {
      graph_error("node '" + node.name + "' references input " +
                  std::to_string(in) + " which does not precede it");
    }
  }
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

const Node& CompGraph::node(int id) const {
  if (id < 0 || id >= size()) {
    graph_error("node id " + std::to_string(id) + " out of range");
  }
  return nodes_[static_cast<size_t>(id)];
}

Node& CompGraph::mutable_node(int id) {
  if (id < 0 || id >= size()) {
    graph_error("node id " + std::to_string(id) + " out of range");
  }
  return nodes_[static_cast<size_t>(id)];
}

const Shape& CompGraph::input_shape() const {
  return node(input_id_).attrs.input_shape;
}

int64_t CompGraph::num_classes() const {
  const int fc = classifier_node_id(*this);
  return node(fc).param("weights").dim(1);
}

int64_t CompGraph::parameter_count() const {
  int64_t n = 0;
  for (const Node& node : nodes_) {
    for (const Param& p : node.params) n += p.value.size();
  }
  return n;
}

bool CompGraph::is_quantized() const {
  bool any = false;
  for (const Node& node : nodes_) {
    for (const Param& p : node.params) {
      if (!p.quant) return false;
      any = true;
    }
  }
  return any;
}

Shape infer_node_shape(const Node& node, std::span<const Shape> in) {
  auto need_rank = [&](const Shape& s, size_t rank) {
    if (s.size() != rank) {
      throw Error(ErrorCode::kShapeMismatch,
                  describe(node) + " expects a " + std::to_string(rank) +
                      "-D input, got " + shape_to_string(s));
    }
  };
  switch (node.kind) {
    case OpKind::kInput: {
      const Shape& s = node.attrs.input_shape;
      if (s.size() != 3) graph_error(describe(node) + " needs an [h,w,c] shape");
      return {1, s[0], s[1], s[2]};
    }
    case OpKind::kConstant:
      return node.param("value").shape();
    case OpKind::kConv2D: {
      need_rank(in[0], 4);
      const Shape& k = node.param("kernel").shape();
      if (k.size() != 4 || k[2] != in[0][3]) {
        throw Error(ErrorCode::kShapeMismatch,
                    describe(node) + ": kernel " + shape_to_string(k) +
                        " does not accept input " + shape_to_string(in[0]));
      }
      const int64_t oh = conv_output_size(in[0][1], k[0], node.attrs.stride.h,
                                          node.attrs.padding);
      const int64_t ow = conv_output_size(in[0][2], k[1], node.attrs.stride.w,
                                          node.attrs.padding);
      if (oh < 1 || ow < 1) {
        throw Error(ErrorCode::kShapeMismatch,
                    describe(node) + ": kernel larger than input " +
                        shape_to_string(in[0]));
      }
      return {in[0][0], oh, ow, k[3]};
    }
    case OpKind::kMaxPool:
    case OpKind::kAvgPool: {
      need_rank(in[0], 4);
      const int64_t oh = conv_output_size(in[0][1], node.attrs.window.h,
                                          node.attrs.stride.h, node.attrs.padding);
      const int64_t ow = conv_output_size(in[0][2], node.attrs.window.w,
                                          node.attrs.stride.w, node.attrs.padding);
      if (oh < 1 || ow < 1) {
        throw Error(ErrorCode::kShapeMismatch,
                    describe(node) + ": window larger than input " +
                        shape_to_string(in[0]));
      }
      return {in[0][0], oh, ow, in[0][3]};
    }
    case OpKind::kBatchNorm: {
      const int64_t c = in[0].back();
      for (const Param& p : node.params) {
        if (p.value.shape() != Shape{c}) {
          throw Error(ErrorCode::kShapeMismatch,
                      describe(node) + ": parameter '" + p.name + "' shape " +
                          shape_to_string(p.value.shape()) + " vs " +
                          std::to_string(c) + " channels");
        }
      }
      return in[0];
    }
    case OpKind::kRelu:
    case OpKind::kSoftmax:
      if (node.kind == OpKind::kSoftmax) need_rank(in[0], 2);
      return in[0];
    case OpKind::kGlobalAvgPool:
      need_rank(in[0], 4);
      return {in[0][0], in[0][3]};
    case OpKind::kConcat: {
      Shape out = in[0];
      for (size_t i = 1; i < in.size(); ++i) {
        if (in[i].size() != out.size() ||
            !std::equal(out.begin(), out.end() - 1, in[i].begin())) {
          throw Error(ErrorCode::kShapeMismatch,
                      describe(node) + ": cannot concatenate " +
                          shape_to_string(in[i]) + " with " +
                          shape_to_string(in[0]));
        }
        out.back() += in[i].back();
      }
      return out;
    }
    case OpKind::kAdd:
      if (in[0] == in[1] || (in[1].size() == 1 && in[1][0] == in[0].back())) {
        return in[0];
      }
      throw Error(ErrorCode::kShapeMismatch,
                  describe(node) + ": cannot add " + shape_to_string(in[0]) +
                      " and " + shape_to_string(in[1]));
    case OpKind::kFullyConnected: {
      need_rank(in[0], 2);
      const Shape& w = node.param("weights").shape();
      const Shape& b = node.param("bias").shape();
      if (w.size() != 2 || w[0] != in[0][1] || b != Shape{w[1]}) {
        throw Error(ErrorCode::kShapeMismatch,
                    describe(node) + ": weights " + shape_to_string(w) +
                        " / bias " + shape_to_string(b) +
                        " do not accept input " + shape_to_string(in[0]));
      }
      return {in[0][0], w[1]};
    }
  }
  graph_error(describe(node) + " has an unknown kind");
}

std::vector<Shape> CompGraph::infer_shapes() const {
  std::vector<Shape> shapes;
  shapes.reserve(nodes_.size());
  std::vector<Shape> in;
  for (const Node& n : nodes_) {
    in.clear();
    for (int id : n.inputs) in.push_back(shapes[static_cast<size_t>(id)]);
    shapes.push_back(infer_node_shape(n, in));
  }
  return shapes;
}

void CompGraph::validate() const {
  if (nodes_.empty()) graph_error("graph is empty");
  int inputs = 0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id != static_cast<int>(i)) {
      graph_error(describe(n) + " is stored at position " + std::to_string(i));
    }
    for (int in : n.inputs) {
      if (in < 0 || in >= n.id) {
        graph_error(describe(n) + " has a non-topological edge from " +
                    std::to_string(in));
      }
    }
    const int want = arity(n.kind);
    const int got = static_cast<int>(n.inputs.size());
    if ((want >= 0 && got != want) || (want < 0 && got < 2)) {
      graph_error(describe(n) + " has " + std::to_string(got) + " inputs");
    }
    for (std::string_view p : required_params(n.kind)) {
      if (!n.find_param(p)) {
        graph_error(describe(n) + " is missing parameter '" + std::string(p) +
                    "'");
      }
    }
    for (const Param& p : n.params) {
      if (p.quant && p.quant->descriptor.shape != p.value.shape()) {
        graph_error(describe(n) + ": quantized '" + p.name +
                    "' shape disagrees with its value");
      }
    }
    if (n.kind == OpKind::kInput) ++inputs;
  }
  if (inputs != 1) {
    graph_error("graph must have exactly one input node, found " +
                std::to_string(inputs));
  }
  if (input_id_ < 0 || input_id_ >= size() ||
      node(input_id_).kind != OpKind::kInput) {
    graph_error("input_id does not designate the input node");
  }
  if (output_id_ < 0 || output_id_ >= size() ||
      node(output_id_).kind != OpKind::kSoftmax) {
    graph_error("output node must be a softmax");
  }
  if (bottleneck_id_ < 0 || bottleneck_id_ >= size()) {
    graph_error("bottleneck_id out of range");
  }

  // The bottleneck dominates the output iff the output is unreachable from
  // the input once the bottleneck is removed.
  if (bottleneck_id_ != input_id_) {
    std::vector<bool> reach(nodes_.size(), false);
    reach[static_cast<size_t>(input_id_)] = true;
    for (const Node& n : nodes_) {
      if (n.id == bottleneck_id_) continue;
      for (int in : n.inputs) {
        if (reach[static_cast<size_t>(in)]) reach[static_cast<size_t>(n.id)] = true;
      }
    }
    if (reach[static_cast<size_t>(output_id_)]) {
      graph_error("bottleneck node " + std::to_string(bottleneck_id_) +
                  " does not lie on every input-to-output path");
    }
  }
  std::vector<bool> feeds(nodes_.size(), false);
  feeds[static_cast<size_t>(output_id_)] = true;
  for (int i = output_id_; i >= 0; --i) {
    if (!feeds[static_cast<size_t>(i)]) continue;
    for (int in : nodes_[static_cast<size_t>(i)].inputs) {
      feeds[static_cast<size_t>(in)] = true;
    }
  }
  if (!feeds[static_cast<size_t>(input_id_)]) {
    graph_error("output does not depend on the input");
  }

  try {
    (void)infer_shapes();
  } catch (const Error& e) {
    graph_error(std::string("shape check failed: ") + e.what());
  }
}

Tensor evaluate_node(const Node& node, std::span<const Tensor* const> in) {
  switch (node.kind) {
    case OpKind::kInput:
      return *in[0];
    case OpKind::kConstant:
      return node.param("value");
    case OpKind::kConv2D:
      return conv2d(*in[0], conv_spec(node));
    case OpKind::kBatchNorm:
      return batch_norm(*in[0], bn_params(node));
    case OpKind::kRelu:
      return relu(*in[0]);
    case OpKind::kMaxPool:
      return pool(*in[0], PoolMode::kMax, node.attrs.window, node.attrs.stride,
                  node.attrs.padding);
    case OpKind::kAvgPool:
      return pool(*in[0], PoolMode::kAvg, node.attrs.window, node.attrs.stride,
                  node.attrs.padding);
    case OpKind::kGlobalAvgPool:
      return global_avg_pool(*in[0]);
    case OpKind::kConcat: {
      std::vector<Tensor> parts;
      parts.reserve(in.size());
      for (const Tensor* t : in) parts.push_back(*t);
      return concat_channels(parts);
    }
    case OpKind::kAdd:
      return add(*in[0], *in[1]);
    case OpKind::kFullyConnected:
      return fully_connected(*in[0], node.param("weights"), node.param("bias"));
    case OpKind::kSoftmax:
      return softmax(*in[0]);
  }
  graph_error(describe(node) + " has an unknown kind");
}

Tensor evaluate_until(const CompGraph& graph, const Tensor& input, int target) {
  const Node& in_node = graph.node(graph.input_id());
  const Shape& want = in_node.attrs.input_shape;
  if (input.rank() != 4 || input.dim(1) != want[0] || input.dim(2) != want[1] ||
      input.dim(3) != want[2]) {
    throw Error(ErrorCode::kShapeMismatch,
                describe(in_node) + " expects [batch," + std::to_string(want[0]) +
                    "," + std::to_string(want[1]) + "," +
                    std::to_string(want[2]) + "], got " +
                    shape_to_string(input.shape()));
  }
  graph.node(target);

  // Only nodes that feed the target are evaluated; intermediates are
  // released after their last consumer runs.
  const auto n = static_cast<size_t>(graph.size());
  std::vector<bool> needed(n, false);
  std::vector<int> remaining_uses(n, 0);
  needed[static_cast<size_t>(target)] = true;
  for (int i = target; i >= 0; --i) {
    if (!needed[static_cast<size_t>(i)]) continue;
    for (int src : graph.node(i).inputs) {
      needed[static_cast<size_t>(src)] = true;
      ++remaining_uses[static_cast<size_t>(src)];
    }
  }
  std::vector<std::optional<Tensor>> values(n);
  std::vector<const Tensor*> args;
  for (int i = 0; i <= target; ++i) {
    if (!needed[static_cast<size_t>(i)]) continue;
    const Node& node = graph.node(i);
    args.clear();
    if (node.kind == OpKind::kInput) {
      args.push_back(&input);
    }
    for (int src : node.inputs) args.push_back(&*values[static_cast<size_t>(src)]);
    try {
      values[static_cast<size_t>(i)] = evaluate_node(node, args);
    } catch (const Error& e) {
      throw Error(e.code(), describe(node) + ": " + e.what());
    }
    for (int src : node.inputs) {
      if (--remaining_uses[static_cast<size_t>(src)] == 0) {
        values[static_cast<size_t>(src)].reset();
      }
    }
  }
  return std::move(*values[static_cast<size_t>(target)]);
}

Tensor forward(const CompGraph& graph, const Tensor& input) {
  return evaluate_until(graph, input, graph.output_id());
}

Tensor bottleneck(const CompGraph& graph, const Tensor& input) {
  return evaluate_until(graph, input, graph.bottleneck_id());
}

int classifier_node_id(const CompGraph& graph) {
  const Node& out = graph.node(graph.output_id());
  if (out.inputs.size() == 1) {
    const Node& fc = graph.node(out.inputs[0]);
    if (fc.kind == OpKind::kFullyConnected && fc.inputs.size() == 1 &&
        fc.inputs[0] == graph.bottleneck_id()) {
      return fc.id;
    }
  }
  throw Error(ErrorCode::kInvalidGraph,
              "output softmax is not fed by a fully connected layer over the "
              "bottleneck");
}

}  // namespace canopy
