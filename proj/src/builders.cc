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

#include "canopy/builders.h"

#include <cmath>
#include <optional>
#include <utility>

#include "canopy/error.h"

namespace canopy {

Tensor GraphBuilder::he_normal(Shape shape, int64_t fan_in) {
  Tensor t(std::move(shape));
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.mutable_data()) v = rng_.normal() * stddev;
  return t.rounded_to_float();
}

int GraphBuilder::raw(Node node) {
  std::vector<Shape> in;
  for (int id : node.inputs) in.push_back(shape(id));
  Shape out = infer_node_shape(node, in);
  const int id = graph_.add_node(std::move(node));
  shapes_.push_back(std::move(out));
  return id;
}

int GraphBuilder::input(int64_t h, int64_t w, int64_t c, std::string name) {
  Node n{.kind = OpKind::kInput, .name = std::move(name)};
  n.attrs.input_shape = {h, w, c};
  return raw(std::move(n));
}

int GraphBuilder::constant(Tensor value, std::string name) {
  Node n{.kind = OpKind::kConstant, .name = std::move(name)};
  n.params.push_back({"value", value.rounded_to_float(), std::nullopt});
  return raw(std::move(n));
}

int GraphBuilder::conv(int src, Extent kernel, int64_t out_channels,
                       Extent stride, Padding padding, std::string name,
                       bool with_bias) {
  const int64_t cin = channels(src);
  Node n{.kind = OpKind::kConv2D, .name = std::move(name), .inputs = {src}};
  n.attrs.stride = stride;
  n.attrs.padding = padding;
  n.params.push_back({"kernel",
                      he_normal({kernel.h, kernel.w, cin, out_channels},
                                kernel.h * kernel.w * cin),
                      std::nullopt});
  if (with_bias) n.params.push_back({"bias", Tensor({out_channels}), std::nullopt});
  return raw(std::move(n));
}

int GraphBuilder::batch_norm(int src, std::string name) {
  const int64_t c = channels(src);
  Tensor mean({c}), var({c}), gamma({c}), beta({c});
  for (int64_t i = 0; i < c; ++i) {
    gamma[i] = rng_.uniform(0.8, 1.2);
    beta[i] = rng_.uniform(-0.1, 0.1);
    mean[i] = rng_.uniform(-0.1, 0.1);
    var[i] = rng_.uniform(0.8, 1.2);
  }
  Node n{.kind = OpKind::kBatchNorm, .name = std::move(name), .inputs = {src}};
  n.params = {{"mean", mean.rounded_to_float(), std::nullopt},
              {"variance", var.rounded_to_float(), std::nullopt},
              {"gamma", gamma.rounded_to_float(), std::nullopt},
              {"beta", beta.rounded_to_float(), std::nullopt}};
  return raw(std::move(n));
}

int GraphBuilder::relu(int src, std::string name) {
  return raw({.kind = OpKind::kRelu, .name = std::move(name), .inputs = {src}});
}

int GraphBuilder::conv_bn_relu(int src, Extent kernel, int64_t out_channels,
                               Extent stride, Padding padding,
                               const std::string& name) {
  const int c = conv(src, kernel, out_channels, stride, padding, name + "/conv");
  const int bn = batch_norm(c, name + "/bn");
  return relu(bn, name + "/relu");
}

int GraphBuilder::max_pool(int src, Extent window, Extent stride,
                           Padding padding, std::string name) {
  Node n{.kind = OpKind::kMaxPool, .name = std::move(name), .inputs = {src}};
  n.attrs.window = window;
  n.attrs.stride = stride;
  n.attrs.padding = padding;
  return raw(std::move(n));
}

int GraphBuilder::avg_pool(int src, Extent window, Extent stride,
                           Padding padding, std::string name) {
  Node n{.kind = OpKind::kAvgPool, .name = std::move(name), .inputs = {src}};
  n.attrs.window = window;
  n.attrs.stride = stride;
  n.attrs.padding = padding;
  return raw(std::move(n));
}

int GraphBuilder::global_avg_pool(int src, std::string name) {
  return raw({.kind = OpKind::kGlobalAvgPool, .name = std::move(name),
              .inputs = {src}});
}

int GraphBuilder::concat(std::vector<int> srcs, std::string name) {
  return raw({.kind = OpKind::kConcat, .name = std::move(name),
              .inputs = std::move(srcs)});
}

int GraphBuilder::add(int a, int b, std::string name) {
  return raw({.kind = OpKind::kAdd, .name = std::move(name), .inputs = {a, b}});
}

int GraphBuilder::fully_connected(int src, int64_t outputs, std::string name) {
  const int64_t d = shape(src).back();
  Node n{.kind = OpKind::kFullyConnected, .name = std::move(name),
         .inputs = {src}};
  n.params = {{"weights", he_normal({d, outputs}, d), std::nullopt},
              {"bias", Tensor({outputs}), std::nullopt}};
  return raw(std::move(n));
}

int GraphBuilder::softmax(int src, std::string name) {
  return raw({.kind = OpKind::kSoftmax, .name = std::move(name),
              .inputs = {src}});
}

CompGraph GraphBuilder::finish(int input_id, int bottleneck_id, int output_id) {
  graph_.set_input(input_id);
  graph_.set_bottleneck(bottleneck_id);
  graph_.set_output(output_id);
  graph_.validate();
  CompGraph out = std::move(graph_);
  graph_ = CompGraph();
  shapes_.clear();
  return out;
}

int inception_module(GraphBuilder& builder, int input,
                     std::span<const Branch> branches, std::string_view name) {
  const std::string prefix(name);
  if (branches.size() < 2 || branches.size() > 4) {
    throw Error(ErrorCode::kInvalidArgument,
                prefix + ": an inception module needs 2-4 branches, got " +
                    std::to_string(branches.size()));
  }
  // Dry-run the spatial arithmetic so a bad spec leaves the graph untouched.
  const Shape& in = builder.shape(input);
  if (in.size() != 4) {
    throw Error(ErrorCode::kShapeMismatch,
                prefix + ": input must be 4-D, got " + shape_to_string(in));
  }
  std::vector<std::pair<int64_t, int64_t>> extents;
  for (size_t b = 0; b < branches.size(); ++b) {
    if (branches[b].empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  prefix + ": branch " + std::to_string(b) + " is empty");
    }
    int64_t h = in[1], w = in[2];
    for (const BranchStep& s : branches[b]) {
      if (s.kind == BranchStep::Kind::kConv && s.channels < 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    prefix + ": branch " + std::to_string(b) +
                        " has a convolution without output channels");
      }
      h = conv_output_size(h, s.kernel.h, s.stride.h, s.padding);
      w = conv_output_size(w, s.kernel.w, s.stride.w, s.padding);
      if (h < 1 || w < 1) {
        throw Error(ErrorCode::kShapeMismatch,
                    prefix + ": branch " + std::to_string(b) +
                        " shrinks the input below one pixel");
      }
    }
    extents.emplace_back(h, w);
    if (extents.back() != extents.front()) {
      throw Error(ErrorCode::kShapeMismatch,
                  prefix + ": branch " + std::to_string(b) + " ends at " +
                      std::to_string(h) + "x" + std::to_string(w) +
                      " but branch 0 ends at " +
                      std::to_string(extents.front().first) + "x" +
                      std::to_string(extents.front().second));
    }
  }

  std::vector<int> tails;
  for (size_t b = 0; b < branches.size(); ++b) {
    int cur = input;
    int step = 0;
    for (const BranchStep& s : branches[b]) {
      const std::string n = prefix + "/branch" + std::to_string(b) + "_" +
                            std::to_string(step++);
      switch (s.kind) {
        case BranchStep::Kind::kConv:
          cur = builder.conv_bn_relu(cur, s.kernel, s.channels, s.stride,
                                     s.padding, n);
          break;
        case BranchStep::Kind::kMaxPool:
          cur = builder.max_pool(cur, s.kernel, s.stride, s.padding, n + "/max_pool");
          break;
        case BranchStep::Kind::kAvgPool:
          cur = builder.avg_pool(cur, s.kernel, s.stride, s.padding, n + "/avg_pool");
          break;
      }
    }
    tails.push_back(cur);
  }
  return builder.concat(std::move(tails), prefix + "/concat");
}

void calibrate_batch_norm(CompGraph& graph, const Tensor& batch) {
  std::vector<std::optional<Tensor>> values(static_cast<size_t>(graph.size()));
  std::vector<int> remaining(static_cast<size_t>(graph.size()), 0);
  for (const Node& n : graph.nodes()) {
    for (int i : n.inputs) ++remaining[static_cast<size_t>(i)];
  }
  for (int id = 0; id < graph.size(); ++id) {
    Node& node = graph.mutable_node(id);
    if (node.kind == OpKind::kInput) {
      values[static_cast<size_t>(id)] = batch;
      continue;
    }
    if (node.kind == OpKind::kBatchNorm) {
      const Tensor& in = *values[static_cast<size_t>(node.inputs[0])];
      const int64_t c = in.shape().back();
      const int64_t rows = in.size() / c;
      Tensor mean({c});
      Tensor var({c});
      for (int64_t r = 0; r < rows; ++r) {
        for (int64_t j = 0; j < c; ++j) mean[j] += in[r * c + j];
      }
      for (int64_t j = 0; j < c; ++j) mean[j] /= static_cast<double>(rows);
      for (int64_t r = 0; r < rows; ++r) {
        for (int64_t j = 0; j < c; ++j) {
          const double d = in[r * c + j] - mean[j];
          var[j] += d * d;
        }
      }
      for (int64_t j = 0; j < c; ++j) var[j] /= static_cast<double>(rows);
      for (Param& p : node.params) {
        if (p.name == "mean") p.value = mean.rounded_to_float();
        if (p.name == "variance") p.value = var.rounded_to_float();
      }
    }
    std::vector<const Tensor*> inputs;
    for (int i : node.inputs) inputs.push_back(&*values[static_cast<size_t>(i)]);
    values[static_cast<size_t>(id)] = evaluate_node(node, inputs);
    for (int i : node.inputs) {
      if (--remaining[static_cast<size_t>(i)] == 0) values[static_cast<size_t>(i)].reset();
    }
  }
}

CompGraph build_mini_inception(int64_t num_classes, uint64_t seed) {
  if (num_classes < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "mini inception needs at least 2 classes, got " +
                    std::to_string(num_classes));
  }
  using S = BranchStep;
  GraphBuilder b(seed);
  const int in = b.input(kMiniInceptionInputSize, kMiniInceptionInputSize, 3);
  int x = b.conv_bn_relu(in, {3, 3}, 16, {2, 2}, Padding::kSame, "stem_1");
  x = b.conv_bn_relu(x, {3, 3}, 32, {1, 1}, Padding::kSame, "stem_2");
  x = b.max_pool(x, {3, 3}, {2, 2}, Padding::kSame, "stem_pool");

  const std::vector<Branch> mixed_1{
      {S::conv(1, 1, 16)},
      {S::conv(1, 1, 16), S::conv(3, 3, 24)},
      {S::conv(1, 1, 8), S::conv(3, 3, 12), S::conv(3, 3, 12)},
      {S::avg_pool(3), S::conv(1, 1, 12)},
  };
  x = inception_module(b, x, mixed_1, "mixed_1");
  const std::vector<Branch> mixed_2{
      {S::conv(1, 1, 24)},
      {S::conv(1, 1, 24), S::conv(3, 3, 32)},
      {S::conv(1, 1, 12), S::conv(3, 3, 20), S::conv(3, 3, 20)},
      {S::avg_pool(3), S::conv(1, 1, 20)},
  };
  x = inception_module(b, x, mixed_2, "mixed_2");

  const int pooled = b.global_avg_pool(x, "bottleneck");
  const int logits = b.fully_connected(pooled, num_classes, "classifier");
  const int out = b.softmax(logits, "softmax");

  CompGraph g = b.finish(in, pooled, out);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Tensor batch({kCalibrationBatch, kMiniInceptionInputSize, kMiniInceptionInputSize, 3});
  for (double& v : batch.mutable_data()) v = rng.uniform(-1.0, 1.0);
  calibrate_batch_norm(g, batch);
  g.validate();
  g.metadata()["name"] = "mini_inception";
  g.metadata()["version"] = "1";
  g.metadata()["num_classes"] = std::to_string(num_classes);
  g.metadata()["seed"] = std::to_string(seed);
  return g;
}

}  // namespace canopy
