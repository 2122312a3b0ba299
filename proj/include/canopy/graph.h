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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canopy/ops.h"
#include "canopy/tensor.h"

namespace canopy {

enum class OpKind {
  kInput,
  kConstant,
  kConv2D,
  kBatchNorm,
  kRelu,
  kMaxPool,
  kAvgPool,
  kGlobalAvgPool,
  kConcat,
  kAdd,
  kFullyConnected,
  kSoftmax,
};

std::string_view op_kind_name(OpKind kind);
OpKind op_kind_from_name(std::string_view name);

// Affine int8 encoding of one weight tensor: value = scale * (q - zero_point).
struct QuantDescriptor {
  double scale = 1.0;
  int zero_point = 0;
  Shape shape;
  friend bool operator==(const QuantDescriptor&, const QuantDescriptor&) = default;
};

struct QuantizedTensor {
  QuantDescriptor descriptor;
  std::vector<int8_t> values;

  Tensor dequantize() const;
  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

// A named constant attached to a node. When `quant` is set, `value` holds
// its dequantized form, which is what evaluation uses.
struct Param {
  std::string name;
  Tensor value;
  std::optional<QuantizedTensor> quant;
  friend bool operator==(const Param&, const Param&) = default;
};

struct NodeAttrs {
  Extent window{1, 1};
  Extent stride{1, 1};
  Padding padding = Padding::kSame;
  double epsilon = 1e-3;
  Shape input_shape;  // [h, w, c] for kInput
  friend bool operator==(const NodeAttrs&, const NodeAttrs&) = default;
};

struct Node {
  int id = -1;
  OpKind kind = OpKind::kInput;
  std::string name;
  NodeAttrs attrs;
  std::vector<Param> params;
  std::vector<int> inputs;

  const Param* find_param(std::string_view param_name) const;
  const Tensor& param(std::string_view param_name) const;
  friend bool operator==(const Node&, const Node&) = default;
};

// Directed acyclic computation graph. Nodes are stored in topological order:
// every edge points from a lower id to a higher id, and id == position.
class CompGraph {
 public:
  int add_node(Node node);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(int id) const;
  Node& mutable_node(int id);
  int size() const noexcept { return static_cast<int>(nodes_.size()); }

  int input_id() const noexcept { return input_id_; }
  int bottleneck_id() const noexcept { return bottleneck_id_; }
  int output_id() const noexcept { return output_id_; }
  void set_input(int id) { input_id_ = id; }
  void set_bottleneck(int id) { bottleneck_id_ = id; }
  void set_output(int id) { output_id_ = id; }

  std::map<std::string, std::string>& metadata() noexcept { return metadata_; }
  const std::map<std::string, std::string>& metadata() const noexcept {
    return metadata_;
  }

  // [h, w, c] accepted by the input node.
  const Shape& input_shape() const;
  // Width of the output softmax row.
  int64_t num_classes() const;
  int64_t parameter_count() const;
  bool is_quantized() const;

  // Checks the structural invariants: topological edges, a single input
  // node, a softmax output, the bottleneck on every input-to-output path,
  // well-formed parameters and consistent shapes. Throws kInvalidGraph.
  void validate() const;

  // Per-node output shapes for a batch of one.
  std::vector<Shape> infer_shapes() const;

  friend bool operator==(const CompGraph&, const CompGraph&) = default;

 private:
  std::vector<Node> nodes_;
  int input_id_ = -1;
  int bottleneck_id_ = -1;
  int output_id_ = -1;
  std::map<std::string, std::string> metadata_;
};

// Output shape of `node` given its input shapes; throws kShapeMismatch or
// kInvalidGraph naming the node.
Shape infer_node_shape(const Node& node, std::span<const Shape> input_shapes);

// Evaluates a single node on concrete inputs.
Tensor evaluate_node(const Node& node, std::span<const Tensor* const> inputs);

// Full evaluation: softmax probabilities [batch, num_classes].
Tensor forward(const CompGraph& graph, const Tensor& input);
// Evaluation up to the bottleneck node: [batch, d].
Tensor bottleneck(const CompGraph& graph, const Tensor& input);
// Evaluation up to an arbitrary node.
Tensor evaluate_until(const CompGraph& graph, const Tensor& input, int node_id);

// The fully connected node that consumes the bottleneck and feeds the output.
int classifier_node_id(const CompGraph& graph);

}  // namespace canopy
