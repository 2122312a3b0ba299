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

#include <gtest/gtest.h>

#include "canopy/builders.h"
#include "canopy/graph.h"
#include "oracles.h"
#include "test_util.h"

namespace canopy {
namespace {

using testing::error_code_of;
using S = BranchStep;

// Appends global_avg_pool -> fully_connected -> softmax and finishes.
CompGraph close_graph(GraphBuilder& b, int in, int x, int64_t classes = 3) {
  const int pooled = b.global_avg_pool(x, "gap");
  const int fc = b.fully_connected(pooled, classes, "fc");
  return b.finish(in, pooled, b.softmax(fc));
}

TEST(InceptionModule, OutputChannelsAreBranchSum) {
  GraphBuilder b(1);
  const int in = b.input(8, 8, 8);
  const std::vector<Branch> branches{
      {S::conv(1, 1, 16)}, {S::conv(3, 3, 32)}, {S::max_pool(3), S::conv(1, 1, 16)}};
  const int cat = inception_module(b, in, branches, "m");
  EXPECT_EQ(b.shape(cat), (Shape{1, 8, 8, 64}));
  EXPECT_EQ(b.graph().node(cat).kind, OpKind::kConcat);
}

TEST(InceptionModule, RejectsBranchCountOutsideTwoToFour) {
  GraphBuilder b(1);
  const int in = b.input(8, 8, 8);
  const std::vector<Branch> one{{S::conv(1, 1, 4)}};
  EXPECT_EQ(error_code_of([&] { inception_module(b, in, one, "m"); }),
            ErrorCode::kInvalidArgument);
  const std::vector<Branch> five(5, Branch{S::conv(1, 1, 4)});
  EXPECT_EQ(error_code_of([&] { inception_module(b, in, five, "m"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(b.graph().size(), 1);
}

TEST(InceptionModule, ClassicFourBranchEvaluates) {
  GraphBuilder b(7);
  const int in = b.input(8, 8, 8);
  const std::vector<Branch> classic{
      {S::conv(1, 1, 8)},
      {S::conv(1, 1, 6), S::conv(3, 3, 8)},
      {S::conv(1, 1, 4), S::conv(3, 3, 6), S::conv(3, 3, 6)},
      {S::max_pool(3), S::conv(1, 1, 4)},
  };
  const int cat = inception_module(b, in, classic, "classic");
  EXPECT_EQ(b.shape(cat), (Shape{1, 8, 8, 26}));
  const CompGraph g = close_graph(b, in, cat);
  Rng rng(3);
  const Tensor x = oracle::random_tensor(rng, {1, 8, 8, 8}, -1, 1);
  EXPECT_EQ(evaluate_until(g, x, cat).shape(), (Shape{1, 8, 8, 26}));
  EXPECT_EQ(forward(g, x).shape(), (Shape{1, 3}));
}

TEST(InceptionModule, MismatchedSpatialOutputsRejected) {
  GraphBuilder b(1);
  const int in = b.input(8, 8, 4);
  const std::vector<Branch> bad{{S::conv(1, 1, 4)}, {S::conv(3, 3, 4, 2)}};
  EXPECT_EQ(error_code_of([&] { inception_module(b, in, bad, "m"); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(b.graph().size(), 1);
}

TEST(InceptionModule, FactorizedAsymmetricBranches) {
  // 1x7 followed by 7x1, as used by the larger members of the family.
  GraphBuilder b(2);
  const int in = b.input(9, 9, 4);
  const std::vector<Branch> factorized{
      {S::conv(1, 1, 4)},
      {S::conv(1, 1, 3), S::conv(1, 7, 3), S::conv(7, 1, 5)},
      {S::avg_pool(3), S::conv(1, 1, 2)},
  };
  const int cat = inception_module(b, in, factorized, "mixed_6");
  EXPECT_EQ(b.shape(cat), (Shape{1, 9, 9, 11}));
  const CompGraph g = close_graph(b, in, cat);
  Rng rng(4);
  const Tensor p = forward(g, oracle::random_tensor(rng, {2, 9, 9, 4}, -1, 1));
  EXPECT_EQ(p.shape(), (Shape{2, 3}));
}

// Parameter count from the layer table, independent of the builder.
int64_t mini_inception_parameter_oracle(int64_t k) {
  struct Conv {
    int64_t kh, kw, cin, cout;
  };
  const std::vector<Conv> convs{
      {3, 3, 3, 16},  {3, 3, 16, 32},
      // mixed_1 on 32 channels
      {1, 1, 32, 16}, {1, 1, 32, 16}, {3, 3, 16, 24}, {1, 1, 32, 8},
      {3, 3, 8, 12},  {3, 3, 12, 12}, {1, 1, 32, 12},
      // mixed_2 on 64 channels
      {1, 1, 64, 24}, {1, 1, 64, 24}, {3, 3, 24, 32}, {1, 1, 64, 12},
      {3, 3, 12, 20}, {3, 3, 20, 20}, {1, 1, 64, 20},
  };
  int64_t total = 0;
  for (const Conv& c : convs) {
    total += c.kh * c.kw * c.cin * c.cout;  // kernel
    total += 4 * c.cout;                    // batch norm
  }
  return total + 96 * k + k;
}

TEST(MiniInception, SixClassOutputShape) {
  const CompGraph g = build_mini_inception(6, 42);
  EXPECT_EQ(forward(g, Tensor({1, 64, 64, 3})).shape(), (Shape{1, 6}));
  EXPECT_EQ(g.num_classes(), 6);
  EXPECT_EQ(g.input_shape(), (Shape{64, 64, 3}));
}

TEST(MiniInception, ParameterCountMatchesLayerTable) {
  for (int64_t k : {2, 6, 10}) {
    EXPECT_EQ(build_mini_inception(k, 1).parameter_count(),
              mini_inception_parameter_oracle(k));
  }
  EXPECT_EQ(mini_inception_parameter_oracle(6), 31894);
}

TEST(MiniInception, SeedDeterminism) {
  EXPECT_EQ(build_mini_inception(6, 9), build_mini_inception(6, 9));
  EXPECT_NE(build_mini_inception(6, 9), build_mini_inception(6, 10));
}

TEST(MiniInception, WeightsAreFloat32Representable) {
  const CompGraph g = build_mini_inception(6, 3);
  for (const Node& n : g.nodes()) {
    for (const Param& p : n.params) EXPECT_TRUE(p.value.is_float_representable());
  }
}

TEST(MiniInception, RejectsFewerThanTwoClasses) {
  EXPECT_EQ(error_code_of([] { build_mini_inception(1, 0); }),
            ErrorCode::kInvalidArgument);
}

TEST(MiniInception, StructuralInvariants) {
  const CompGraph g = build_mini_inception(6, 5);
  EXPECT_NO_THROW(g.validate());
  int inputs = 0;
  for (const Node& n : g.nodes()) {
    if (n.kind == OpKind::kInput) ++inputs;
    for (int in : n.inputs) EXPECT_LT(in, n.id);
  }
  EXPECT_EQ(inputs, 1);
  EXPECT_EQ(g.node(g.output_id()).kind, OpKind::kSoftmax);
  EXPECT_EQ(g.node(g.bottleneck_id()).kind, OpKind::kGlobalAvgPool);
  EXPECT_EQ(g.infer_shapes()[static_cast<size_t>(g.bottleneck_id())],
            (Shape{1, kMiniInceptionBottleneck}));
}

TEST(Forward, RowsSumToOneAndArePure) {
  const CompGraph g = build_mini_inception(6, 11);
  Rng rng(1);
  const Tensor x = oracle::random_tensor(rng, {3, 64, 64, 3}, -1, 1);
  const Tensor p1 = forward(g, x);
  const Tensor p2 = forward(g, x);
  EXPECT_EQ(p1, p2);
  for (int r = 0; r < 3; ++r) {
    double s = 0;
    for (int j = 0; j < 6; ++j) s += p1[r * 6 + j];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Forward, MatchesManualComposition) {
  GraphBuilder b(21);
  const int in = b.input(5, 5, 2);
  const int conv = b.conv(in, {3, 3}, 4, {1, 1}, Padding::kSame, "conv", true);
  const int act = b.relu(conv, "relu");
  const CompGraph g = close_graph(b, in, act, 3);
  const Node& cn = g.node(conv);
  const Node& fc = g.node(classifier_node_id(g));

  Rng rng(2);
  const Tensor x = oracle::random_tensor(rng, {2, 5, 5, 2}, -1, 1);
  const Tensor manual = softmax(fully_connected(
      global_avg_pool(relu(conv2d(x, {cn.param("kernel"), cn.param("bias"),
                                      {1, 1}, Padding::kSame}))),
      fc.param("weights"), fc.param("bias")));
  EXPECT_EQ(forward(g, x), manual);
}

TEST(Bottleneck, ShapeAndConsistency) {
  const CompGraph g = build_mini_inception(6, 13);
  Rng rng(6);
  const Tensor x = oracle::random_tensor(rng, {2, 64, 64, 3}, -1, 1);
  const Tensor feat = bottleneck(g, x);
  EXPECT_EQ(feat.shape(), (Shape{2, 96}));
  EXPECT_EQ(bottleneck(g, x), feat);
  const Node& fc = g.node(classifier_node_id(g));
  const Tensor via_head =
      softmax(fully_connected(feat, fc.param("weights"), fc.param("bias")));
  EXPECT_LE(max_abs_difference(via_head, forward(g, x)), 1e-6);
}

TEST(Forward, InputShapeMismatchNamesNode) {
  const CompGraph g = build_mini_inception(6, 1);
  const std::string msg = testing::error_message_of(
      [&] { forward(g, Tensor({1, 32, 32, 3})); });
  EXPECT_NE(msg.find("'input'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("[1,32,32,3]"), std::string::npos) << msg;
}

TEST(Validate, RejectsStructuralViolations) {
  {
    // Second input node.
    GraphBuilder b(1);
    const int in = b.input(4, 4, 1);
    b.input(4, 4, 1, "other");
    EXPECT_EQ(error_code_of([&] { close_graph(b, in, in); }),
              ErrorCode::kInvalidGraph);
  }
  {
    // Output is not a softmax.
    GraphBuilder b(1);
    const int in = b.input(4, 4, 1);
    const int gap = b.global_avg_pool(in, "gap");
    const int fc = b.fully_connected(gap, 2, "fc");
    EXPECT_EQ(error_code_of([&] { b.finish(in, gap, fc); }),
              ErrorCode::kInvalidGraph);
  }
  {
    // A path from input to output bypasses the designated bottleneck.
    GraphBuilder b(1);
    const int in = b.input(4, 4, 2);
    const int gap = b.global_avg_pool(in, "gap");
    const int act = b.relu(gap, "act");
    const int side = b.global_avg_pool(in, "side");
    const int sum = b.add(act, side, "sum");
    const int fc = b.fully_connected(sum, 2, "fc");
    EXPECT_EQ(error_code_of([&] { b.finish(in, act, b.softmax(fc)); }),
              ErrorCode::kInvalidGraph);
  }
  {
    // Non-topological edge inserted by hand.
    CompGraph g = build_mini_inception(2, 1);
    g.mutable_node(3).inputs = {10};
    EXPECT_EQ(error_code_of([&] { g.validate(); }), ErrorCode::kInvalidGraph);
  }
}

}  // namespace
}  // namespace canopy
