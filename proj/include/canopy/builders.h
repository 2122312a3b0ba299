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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canopy/graph.h"
#include "canopy/random.h"

namespace canopy {

// One primitive of an inception branch. Convolutions are emitted as
// conv -> batch_norm -> relu; pools are emitted bare.
struct BranchStep {
  enum class Kind { kConv, kMaxPool, kAvgPool };

  Kind kind = Kind::kConv;
  Extent kernel{1, 1};
  Extent stride{1, 1};
  Padding padding = Padding::kSame;
  int64_t channels = 0;  // conv only

  static BranchStep conv(int kh, int kw, int64_t channels, int stride = 1) {
    return {Kind::kConv, {kh, kw}, {stride, stride}, Padding::kSame, channels};
  }
  static BranchStep max_pool(int size, int stride = 1) {
    return {Kind::kMaxPool, {size, size}, {stride, stride}, Padding::kSame, 0};
  }
  static BranchStep avg_pool(int size, int stride = 1) {
    return {Kind::kAvgPool, {size, size}, {stride, stride}, Padding::kSame, 0};
  }
};

using Branch = std::vector<BranchStep>;

// Appends nodes to a CompGraph while tracking shapes. Weights are
// He-initialized (normal, stddev sqrt(2 / fan_in)) from the seeded stream in
// the order nodes are added, and rounded to float32.
class GraphBuilder {
 public:
  explicit GraphBuilder(uint64_t seed) : rng_(seed) {}

  int input(int64_t h, int64_t w, int64_t c, std::string name = "input");
  int constant(Tensor value, std::string name);
  int conv(int src, Extent kernel, int64_t out_channels, Extent stride,
           Padding padding, std::string name, bool with_bias = false);
  int batch_norm(int src, std::string name);
  int relu(int src, std::string name);
  int conv_bn_relu(int src, Extent kernel, int64_t out_channels, Extent stride,
                   Padding padding, const std::string& name);
  int max_pool(int src, Extent window, Extent stride, Padding padding,
               std::string name);
  int avg_pool(int src, Extent window, Extent stride, Padding padding,
               std::string name);
  int global_avg_pool(int src, std::string name);
  int concat(std::vector<int> srcs, std::string name);
  int add(int a, int b, std::string name);
  int fully_connected(int src, int64_t outputs, std::string name);
  int softmax(int src, std::string name = "softmax");

  // Adds a node with explicit parameters; used for hand-assembled graphs.
  int raw(Node node);

  const Shape& shape(int id) const { return shapes_[static_cast<size_t>(id)]; }
  int64_t channels(int id) const { return shape(id).back(); }
  const CompGraph& graph() const { return graph_; }

  // Designates the input/bottleneck/output nodes, validates and returns the
  // graph. The builder is left empty.
  CompGraph finish(int input_id, int bottleneck_id, int output_id);

 private:
  Tensor he_normal(Shape shape, int64_t fan_in);

  CompGraph graph_;
  std::vector<Shape> shapes_;
  Rng rng_;
};

// Appends parallel branches from `input` and a channel concat joining them;
// returns the concat node. Requires 2-4 branches whose outputs share a
// spatial size.
int inception_module(GraphBuilder& builder, int input,
                     std::span<const Branch> branches, std::string_view name);

// Replaces every batch_norm's mean and variance with the per-channel
// statistics of its input over `batch` (population variance), evaluated in
// node order so later layers see the already calibrated earlier ones.
// Gamma and beta are kept.
void calibrate_batch_norm(CompGraph& graph, const Tensor& batch);

// The fixed desk-scale topology:
//   input 64x64x3
//   conv 3x3/2 16 + bn + relu, conv 3x3/1 32 + bn + relu, max_pool 3x3/2
//   mixed_1 -> 64 channels:
//     [1x1 16] [1x1 16, 3x3 24] [1x1 8, 3x3 12, 3x3 12] [avg 3x3, 1x1 12]
//   mixed_2 -> 96 channels:
//     [1x1 24] [1x1 24, 3x3 32] [1x1 12, 3x3 20, 3x3 20] [avg 3x3, 1x1 20]
//   global_avg_pool (bottleneck, 96-d), fully_connected, softmax
// All padding is `same`. Batch-norm statistics are calibrated on a seeded
// batch of uniform [-1, 1] images.
CompGraph build_mini_inception(int64_t num_classes, uint64_t seed);

inline constexpr int64_t kMiniInceptionInputSize = 64;
inline constexpr int64_t kMiniInceptionBottleneck = 96;
inline constexpr int64_t kCalibrationBatch = 16;

}  // namespace canopy
