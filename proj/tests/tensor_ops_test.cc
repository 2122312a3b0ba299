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

#include <cmath>
#include <numeric>

#include "canopy/error.h"
#include "canopy/ops.h"
#include "oracles.h"

namespace canopy {
namespace {

Tensor iota_image(int64_t h, int64_t w) {
  std::vector<double> v(static_cast<size_t>(h * w));
  std::iota(v.begin(), v.end(), 0.0);
  return Tensor({1, h, w, 1}, std::move(v));
}

Tensor ones_kernel(int64_t kh, int64_t kw) { return Tensor({kh, kw, 1, 1}, 1.0); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected canopy::Error";
  return ErrorCode::kIo;
}

// ---- conv2d ----------------------------------------------------------------

TEST(Conv2D, ScaledIdentityKernel) {
  const Tensor in({1, 3, 3, 1}, 1.0);
  const Tensor out = conv2d(in, {Tensor({1, 1, 1, 1}, 2.0), std::nullopt,
                                 {1, 1}, Padding::kSame});
  EXPECT_EQ(out, Tensor({1, 3, 3, 1}, 2.0));
}

TEST(Conv2D, StridedValidSumsMatchOracle) {
  const Tensor in = iota_image(4, 4);
  const Tensor expected({1, 2, 2, 1}, {10, 18, 42, 50});
  EXPECT_EQ(oracle::conv2d(in, ones_kernel(2, 2), nullptr, 2, 2, false), expected);
  EXPECT_EQ(conv2d(in, {ones_kernel(2, 2), std::nullopt, {2, 2}, Padding::kValid}),
            expected);
}

TEST(Conv2D, ZeroKernelAnnihilates) {
  Rng rng(3);
  const Tensor in = oracle::random_tensor(rng, {2, 5, 6, 3}, -4, 4);
  const Tensor out = conv2d(in, {Tensor({3, 3, 3, 4}), std::nullopt, {2, 1},
                                 Padding::kSame});
  EXPECT_EQ(out, Tensor({2, 3, 6, 4}));
}

TEST(Conv2D, RandomShapesMatchOracleExactly) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    const int64_t h = 1 + static_cast<int64_t>(rng.below(8));
    const int64_t w = 1 + static_cast<int64_t>(rng.below(8));
    const int64_t ci = 1 + static_cast<int64_t>(rng.below(4));
    const int64_t co = 1 + static_cast<int64_t>(rng.below(4));
    const int64_t kh = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::min<int64_t>(h, 3))));
    const int64_t kw = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::min<int64_t>(w, 3))));
    const int64_t sh = 1 + static_cast<int64_t>(rng.below(2));
    const int64_t sw = 1 + static_cast<int64_t>(rng.below(2));
    const bool same = rng.below(2) == 0;
    const Tensor in = oracle::random_integer_tensor(rng, {2, h, w, ci}, -5, 5);
    const Tensor k = oracle::random_integer_tensor(rng, {kh, kw, ci, co}, -3, 3);
    const Tensor b = oracle::random_integer_tensor(rng, {co}, -2, 2);
    const ConvSpec spec{k, b, {static_cast<int>(sh), static_cast<int>(sw)},
                        same ? Padding::kSame : Padding::kValid};
    EXPECT_EQ(conv2d(in, spec), oracle::conv2d(in, k, &b, sh, sw, same))
        << "seed " << seed;
  }
}

TEST(Conv2D, AsymmetricKernels) {
  Rng rng(11);
  const Tensor in = oracle::random_integer_tensor(rng, {1, 8, 8, 2}, -4, 4);
  for (auto [kh, kw] : {std::pair{1, 7}, std::pair{7, 1}}) {
    const Tensor k = oracle::random_integer_tensor(rng, {kh, kw, 2, 3}, -2, 2);
    EXPECT_EQ(conv2d(in, {k, std::nullopt, {1, 1}, Padding::kSame}),
              oracle::conv2d(in, k, nullptr, 1, 1, true));
  }
}

TEST(Conv2D, ChannelMismatchNamesDimensions) {
  const Tensor in({1, 4, 4, 3});
  try {
    conv2d(in, {Tensor({3, 3, 2, 8}), std::nullopt, {1, 1}, Padding::kSame});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("3 channels"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[3,3,2,8]"), std::string::npos);
  }
  EXPECT_EQ(code_of([] {
              conv2d(Tensor({4, 4}), {Tensor({1, 1, 1, 1}), std::nullopt,
                                      {1, 1}, Padding::kSame});
            }),
            ErrorCode::kShapeMismatch);
}

TEST(Conv2D, SamePaddingPutsExtraPixelBottomRight) {
  // 4 wide, 2x2 kernel, stride 1: one pad pixel total, placed on the right.
  EXPECT_EQ(conv_pad_before(4, 2, 1, Padding::kSame), 0);
  // 5 wide, 4x4 kernel, stride 1: three total, one before and two after.
  EXPECT_EQ(conv_pad_before(5, 4, 1, Padding::kSame), 1);
  EXPECT_EQ(conv_output_size(7, 3, 2, Padding::kSame), 4);
  EXPECT_EQ(conv_output_size(7, 3, 2, Padding::kValid), 3);
}

// ---- pool ------------------------------------------------------------------

TEST(Pool, ConstantInvariance) {
  const Tensor in({1, 5, 7, 2}, 3.25);
  for (PoolMode m : {PoolMode::kMax, PoolMode::kAvg}) {
    for (Padding p : {Padding::kSame, Padding::kValid}) {
      const Tensor out = pool(in, m, {3, 2}, {2, 2}, p);
      for (double v : out.data()) EXPECT_EQ(v, 3.25);
    }
  }
}

TEST(Pool, MaxStridedMatchesOracle) {
  const Tensor in = iota_image(4, 4);
  const Tensor expected({1, 2, 2, 1}, {5, 7, 13, 15});
  EXPECT_EQ(oracle::pool(in, true, 2, 2, 2, 2, false), expected);
  EXPECT_EQ(pool(in, PoolMode::kMax, {2, 2}, {2, 2}, Padding::kValid), expected);
}

TEST(Pool, AverageOfFour) {
  const Tensor in({1, 2, 2, 1}, {1, 3, 5, 7});
  EXPECT_EQ(pool(in, PoolMode::kAvg, {2, 2}, {1, 1}, Padding::kValid),
            Tensor({1, 1, 1, 1}, {4.0}));
}

TEST(Pool, AverageSameDividesByInBoundsCount) {
  // Corner window of a 3x3 same pool over a 2x2 image sees all four pixels.
  const Tensor in({1, 2, 2, 1}, {1, 3, 5, 7});
  const Tensor out = pool(in, PoolMode::kAvg, {3, 3}, {1, 1}, Padding::kSame);
  for (double v : out.data()) EXPECT_EQ(v, 4.0);
}

TEST(Pool, RandomShapesMatchOracleExactly) {
  for (uint64_t seed = 100; seed < 160; ++seed) {
    Rng rng(seed);
    const int64_t h = 1 + static_cast<int64_t>(rng.below(8));
    const int64_t w = 1 + static_cast<int64_t>(rng.below(8));
    const int64_t c = 1 + static_cast<int64_t>(rng.below(4));
    const int64_t kh = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::min<int64_t>(h, 3))));
    const int64_t kw = 1 + static_cast<int64_t>(rng.below(static_cast<uint64_t>(std::min<int64_t>(w, 3))));
    const int s = 1 + static_cast<int>(rng.below(2));
    const bool same = rng.below(2) == 0;
    const Tensor in = oracle::random_integer_tensor(rng, {1, h, w, c}, -9, 9);
    for (bool max_mode : {true, false}) {
      EXPECT_EQ(pool(in, max_mode ? PoolMode::kMax : PoolMode::kAvg,
                     {static_cast<int>(kh), static_cast<int>(kw)}, {s, s},
                     same ? Padding::kSame : Padding::kValid),
                oracle::pool(in, max_mode, kh, kw, s, s, same))
          << "seed " << seed;
    }
  }
}

TEST(Pool, WindowLargerThanValidInputFails) {
  EXPECT_EQ(code_of([] {
              pool(Tensor({1, 2, 2, 1}), PoolMode::kMax, {3, 3}, {1, 1},
                   Padding::kValid);
            }),
            ErrorCode::kShapeMismatch);
}

// ---- global_avg_pool -------------------------------------------------------

TEST(GlobalAvgPool, ConstantAndSinglePixel) {
  EXPECT_EQ(global_avg_pool(Tensor({2, 3, 4, 5}, 1.5)), Tensor({2, 5}, 1.5));
  const Tensor px({1, 1, 1, 3}, {4, -2, 9});
  EXPECT_EQ(global_avg_pool(px), Tensor({1, 3}, {4, -2, 9}));
}

TEST(GlobalAvgPool, RandomMatchesOracle) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Tensor in = oracle::random_integer_tensor(
        rng,
        {1 + static_cast<int64_t>(rng.below(3)), 1 + static_cast<int64_t>(rng.below(8)),
         1 + static_cast<int64_t>(rng.below(8)), 1 + static_cast<int64_t>(rng.below(4))},
        -20, 20);
    EXPECT_EQ(global_avg_pool(in), oracle::global_mean(in));
  }
}

TEST(GlobalAvgPool, RejectsNon4D) {
  EXPECT_EQ(code_of([] { global_avg_pool(Tensor({3, 3})); }),
            ErrorCode::kShapeMismatch);
}

// ---- relu ------------------------------------------------------------------

TEST(Relu, Basics) {
  EXPECT_EQ(relu(Tensor({4}, -2.0)), Tensor({4}, 0.0));
  const Tensor pos({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(relu(pos), pos);
  Rng rng(5);
  const Tensor r = oracle::random_tensor(rng, {3, 7}, -1, 1);
  EXPECT_EQ(relu(relu(r)), relu(r));
}

// ---- batch_norm ------------------------------------------------------------

TEST(BatchNorm, IdentityParameters) {
  Rng rng(8);
  const Tensor in = oracle::random_tensor(rng, {1, 3, 3, 4}, -5, 5);
  const BatchNormParams p{Tensor({4}, 0.0), Tensor({4}, 1.0), Tensor({4}, 1.0),
                          Tensor({4}, 0.0), 1e-12};
  EXPECT_LE(max_abs_difference(batch_norm(in, p), in), 1e-6);
}

TEST(BatchNorm, ZeroGammaGivesBeta) {
  Rng rng(9);
  const Tensor in = oracle::random_tensor(rng, {2, 2, 2, 2}, -5, 5);
  const BatchNormParams p{Tensor({2}, 0.3), Tensor({2}, 2.0), Tensor({2}, 0.0),
                          Tensor::scalar_vector({1.5, -0.5}), 1e-3};
  const Tensor out = batch_norm(in, p);
  for (int64_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i], i % 2 == 0 ? 1.5 : -0.5);
  }
}

TEST(BatchNorm, RandomMatchesScalarFormula) {
  Rng rng(10);
  const Tensor in = oracle::random_tensor(rng, {2, 3, 3, 5}, -3, 3);
  const BatchNormParams p{oracle::random_tensor(rng, {5}, -1, 1),
                          oracle::random_tensor(rng, {5}, 0, 2),
                          oracle::random_tensor(rng, {5}, -2, 2),
                          oracle::random_tensor(rng, {5}, -1, 1), 1e-3};
  const Tensor out = batch_norm(in, p);
  for (int64_t i = 0; i < in.size(); ++i) {
    const int64_t c = i % 5;
    const double want =
        p.gamma[c] * (in[i] - p.mean[c]) / std::sqrt(p.variance[c] + p.epsilon) +
        p.beta[c];
    EXPECT_NEAR(out[i], want, 1e-12);
  }
}

TEST(BatchNorm, ChannelMismatch) {
  const BatchNormParams p{Tensor({3}), Tensor({3}, 1.0), Tensor({3}, 1.0),
                          Tensor({3}), 1e-3};
  EXPECT_EQ(code_of([&] { batch_norm(Tensor({1, 2, 2, 4}), p); }),
            ErrorCode::kShapeMismatch);
}

// ---- concat_channels -------------------------------------------------------

TEST(Concat, SingleInputIsIdentity) {
  Rng rng(12);
  const std::vector<Tensor> one{oracle::random_tensor(rng, {1, 2, 3, 4}, -1, 1)};
  EXPECT_EQ(concat_channels(one), one[0]);
}

TEST(Concat, ChannelAlgebraAndSliceRoundTrip) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int64_t n = 1 + static_cast<int64_t>(rng.below(2));
    const int64_t h = 1 + static_cast<int64_t>(rng.below(5));
    const int64_t w = 1 + static_cast<int64_t>(rng.below(5));
    std::vector<Tensor> parts;
    const int count = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < count; ++i) {
      parts.push_back(oracle::random_tensor(
          rng, {n, h, w, 1 + static_cast<int64_t>(rng.below(4))}, -1, 1));
    }
    const Tensor cat = concat_channels(parts);
    int64_t offset = 0;
    for (const Tensor& p : parts) {
      EXPECT_EQ(slice_channels(cat, offset, p.dim(3)), p);
      offset += p.dim(3);
    }
    EXPECT_EQ(cat.dim(3), offset);
  }
  const std::vector<Tensor> two_three{Tensor({1, 2, 2, 2}), Tensor({1, 2, 2, 3})};
  EXPECT_EQ(concat_channels(two_three).shape(), (Shape{1, 2, 2, 5}));
}

TEST(Concat, SpatialMismatch) {
  const std::vector<Tensor> bad{Tensor({1, 2, 2, 2}), Tensor({1, 3, 2, 2})};
  EXPECT_EQ(code_of([&] { concat_channels(bad); }), ErrorCode::kShapeMismatch);
}

// ---- fully_connected -------------------------------------------------------

TEST(FullyConnected, IdentityAndZeroInput) {
  Rng rng(13);
  const Tensor x = oracle::random_tensor(rng, {3, 4}, -1, 1);
  Tensor eye({4, 4});
  for (int i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  EXPECT_EQ(fully_connected(x, eye, Tensor({4})), x);
  const Tensor b = Tensor::scalar_vector({1, 2, 3});
  const Tensor out = fully_connected(Tensor({2, 4}), oracle::random_tensor(rng, {4, 3}, -1, 1), b);
  EXPECT_EQ(out, Tensor({2, 3}, {1, 2, 3, 1, 2, 3}));
}

TEST(FullyConnected, RandomMatchesTripleLoop) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int64_t n = 1 + static_cast<int64_t>(rng.below(4));
    const int64_t d = 1 + static_cast<int64_t>(rng.below(8));
    const int64_t k = 1 + static_cast<int64_t>(rng.below(8));
    const Tensor x = oracle::random_integer_tensor(rng, {n, d}, -6, 6);
    const Tensor W = oracle::random_integer_tensor(rng, {d, k}, -6, 6);
    const Tensor b = oracle::random_integer_tensor(rng, {k}, -6, 6);
    EXPECT_EQ(fully_connected(x, W, b), oracle::matmul_bias(x, W, b));
  }
}

TEST(FullyConnected, DimensionMismatch) {
  EXPECT_EQ(code_of([] { fully_connected(Tensor({1, 3}), Tensor({4, 2}), Tensor({2})); }),
            ErrorCode::kShapeMismatch);
}

// ---- softmax / cross_entropy ----------------------------------------------

TEST(Softmax, UniformLogits) {
  const Tensor p = softmax(Tensor({1, 6}, 0.7));
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
}

TEST(Softmax, ShiftInvariance) {
  Rng rng(14);
  const Tensor logits = oracle::random_tensor(rng, {4, 6}, -5, 5);
  for (double c : {-100.0, 3.5, 250.0}) {
    Tensor shifted = logits;
    for (double& v : shifted.mutable_data()) v += c;
    EXPECT_LE(max_abs_difference(softmax(logits), softmax(shifted)), 1e-9);
  }
}

TEST(Softmax, LargeLogitDoesNotOverflow) {
  Tensor logits({1, 6});
  logits[2] = 1000.0;
  const Tensor p = softmax(logits);
  EXPECT_GT(p[2], 0.999);
  for (double v : p.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Softmax, RowProperties) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int64_t k = 1 + static_cast<int64_t>(rng.below(10));
    const Tensor logits = oracle::random_tensor(rng, {3, k}, -50, 50);
    const Tensor p = softmax(logits);
    const auto am_logits = argmax_rows(logits);
    const auto am_p = argmax_rows(p);
    for (int64_t r = 0; r < 3; ++r) {
      double sum = 0.0;
      for (int64_t j = 0; j < k; ++j) {
        EXPECT_GE(p[r * k + j], 0.0);
        EXPECT_LE(p[r * k + j], 1.0);
        sum += p[r * k + j];
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
    EXPECT_EQ(am_logits, am_p);
  }
}

TEST(CrossEntropy, AnalyticCases) {
  Tensor onehot({2, 3});
  onehot[1] = 1.0;
  onehot[3 + 2] = 1.0;
  const std::vector<int> labels{1, 2};
  EXPECT_NEAR(cross_entropy(onehot, labels), 0.0, 1e-12);
  const std::vector<int> l6{4};
  EXPECT_NEAR(cross_entropy(Tensor({1, 6}, 1.0 / 6.0), l6), 1.791759469228055, 1e-12);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  const std::vector<int> labels{0};
  EXPECT_NEAR(cross_entropy(Tensor({1, 2}, {0.0, 1.0}), labels),
              -std::log(1e-12), 1e-9);
}

TEST(CrossEntropy, MatchesScalarFormula) {
  Rng rng(15);
  const Tensor p = softmax(oracle::random_tensor(rng, {5, 4}, -3, 3));
  const std::vector<int> labels{0, 3, 2, 1, 1};
  double want = 0.0;
  for (int r = 0; r < 5; ++r) want -= std::log(p[r * 4 + labels[static_cast<size_t>(r)]]);
  EXPECT_NEAR(cross_entropy(p, labels), want / 5.0, 1e-12);
}

TEST(CrossEntropy, OutOfRangeLabel) {
  const std::vector<int> labels{3};
  EXPECT_EQ(code_of([&] { cross_entropy(Tensor({1, 3}, 1.0 / 3), labels); }),
            ErrorCode::kOutOfRange);
}

// ---- head_gradients --------------------------------------------------------

TEST(HeadGradients, ZeroAtOptimum) {
  // Logit gaps of 1000 make softmax exactly one-hot in double precision.
  Tensor x({2, 1}, {1.0, -1.0});
  Tensor W({1, 2}, {1000.0, -1000.0});
  const std::vector<int> labels{0, 1};
  const HeadGradients g = head_gradients(x, W, Tensor({2}), labels);
  EXPECT_EQ(g.dW, Tensor({1, 2}));
  EXPECT_EQ(g.db, Tensor({2}));
  EXPECT_NEAR(g.loss, 0.0, 1e-12);
}

TEST(HeadGradients, SingleExampleHandDerivation) {
  // x = 2, W = [0.5, -0.5] => logits [1, -1], p0 = sigmoid(2).
  const Tensor x({1, 1}, {2.0});
  const Tensor W({1, 2}, {0.5, -0.5});
  const std::vector<int> labels{0};
  const HeadGradients g = head_gradients(x, W, Tensor({2}), labels);
  EXPECT_NEAR(g.db[0], -0.11920292202211757, 1e-15);
  EXPECT_NEAR(g.db[1], 0.11920292202211756, 1e-15);
  EXPECT_NEAR(g.dW[0], -0.23840584404423515, 1e-15);
  EXPECT_NEAR(g.dW[1], 0.23840584404423512, 1e-15);
  EXPECT_NEAR(g.loss, 0.12692801104297252, 1e-15);
}

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

TEST(HeadGradients, MatchesCentralFiniteDifferences) {
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(1000 + seed);
    const Tensor x = oracle::random_tensor(rng, {4, 3}, -1, 1);
    Tensor W = oracle::random_tensor(rng, {3, 6}, -1, 1);
    Tensor b = oracle::random_tensor(rng, {6}, -0.5, 0.5);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.below(6)));
    const HeadGradients g = head_gradients(x, W, b, labels);
    EXPECT_NEAR(g.loss, oracle::head_loss(x, W, b, labels), 1e-12);
    for (int64_t i = 0; i < W.size(); ++i) {
      const double saved = W[i];
      W[i] = saved + h;
      const double up = oracle::head_loss(x, W, b, labels);
      W[i] = saved - h;
      const double down = oracle::head_loss(x, W, b, labels);
      W[i] = saved;
      worst = std::max(worst, relative_error(g.dW[i], (up - down) / (2 * h)));
    }
    for (int64_t i = 0; i < b.size(); ++i) {
      const double saved = b[i];
      b[i] = saved + h;
      const double up = oracle::head_loss(x, W, b, labels);
      b[i] = saved - h;
      const double down = oracle::head_loss(x, W, b, labels);
      b[i] = saved;
      worst = std::max(worst, relative_error(g.db[i], (up - down) / (2 * h)));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

// ---- resize / normalize ----------------------------------------------------

TEST(ResizeBilinear, IdentitySizeIsBitEqual) {
  Rng rng(16);
  const Tensor img = oracle::random_tensor(rng, {1, 5, 7, 3}, 0, 255);
  EXPECT_EQ(resize_bilinear(img, 5, 7), img);
}

TEST(ResizeBilinear, ConstantImageStaysConstant) {
  const Tensor img({1, 9, 4, 3}, 77.0);
  const Tensor out = resize_bilinear(img, 13, 2);
  for (double v : out.data()) EXPECT_DOUBLE_EQ(v, 77.0);
}

TEST(ResizeBilinear, HalfPixelSampling) {
  // 2 -> 4 upsample of [0, 10]: samples at -0.25 (clamped), 0.25, 0.75, 1.25.
  const Tensor img({1, 1, 2, 1}, {0.0, 10.0});
  const Tensor out = resize_bilinear(img, 1, 4);
  EXPECT_EQ(out, Tensor({1, 1, 4, 1}, {0.0, 2.5, 7.5, 10.0}));
}

TEST(ResizeBilinear, CameraFrameToInceptionInput) {
  const Tensor frame({1, 3024, 4023, 3}, 128.0);
  const Tensor out = resize_bilinear(frame, 299, 299);
  EXPECT_EQ(out.shape(), (Shape{1, 299, 299, 3}));
}

TEST(ResizeBilinear, RejectsNonPositiveTarget) {
  EXPECT_EQ(code_of([] { resize_bilinear(Tensor({1, 2, 2, 1}), 0, 3); }),
            ErrorCode::kInvalidArgument);
}

TEST(NormalizePixels, Modes) {
  const Tensor px = Tensor::scalar_vector({0.0, 127.5, 255.0});
  EXPECT_EQ(normalize_pixels(px), Tensor::scalar_vector({-1.0, 0.0, 1.0}));
  EXPECT_EQ(normalize_pixels(px, PixelNorm::kUnit),
            Tensor::scalar_vector({0.0, 0.5, 1.0}));
}

// ---- tensor invariants -----------------------------------------------------

TEST(Tensor, RejectsNonFiniteAndBadShapes) {
  EXPECT_EQ(code_of([] { Tensor({2}, {1.0, NAN}); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([] { Tensor({2, 0}); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([] { Tensor({1, 1, 1, 1, 1}); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([] { Tensor({3}, std::vector<double>{1, 2}); }),
            ErrorCode::kShapeMismatch);
}

TEST(Tensor, OverflowIsReportedNotReturned) {
  const Tensor big({1, 1, 1, 1}, 1e308);
  EXPECT_EQ(code_of([&] {
              conv2d(big, {Tensor({1, 1, 1, 1}, 10.0), std::nullopt, {1, 1},
                           Padding::kSame});
            }),
            ErrorCode::kOutOfRange);
}

}  // namespace
}  // namespace canopy
