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

#include <optional>
#include <span>
#include <vector>

#include "canopy/tensor.h"

namespace canopy {

enum class Padding { kSame, kValid };
enum class PoolMode { kMax, kAvg };
enum class PixelNorm { kUnit, kSymmetric };

struct Extent {
  int h = 1;
  int w = 1;
  friend bool operator==(const Extent&, const Extent&) = default;
};

struct ConvSpec {
  Tensor kernel;  // [kh, kw, cin, cout]
  std::optional<Tensor> bias;  // [cout]
  Extent stride{1, 1};
  Padding padding = Padding::kSame;
};

struct BatchNormParams {
  Tensor mean;
  Tensor variance;
  Tensor gamma;
  Tensor beta;
  double epsilon = 1e-3;
};

struct HeadGradients {
  Tensor dW;  // [d, k]
  Tensor db;  // [k]
  double loss = 0.0;
};

// Output extent along one axis for the given padding. `same` pads
// symmetrically, with the odd pixel going to the bottom/right.
int64_t conv_output_size(int64_t in, int64_t window, int64_t stride,
                         Padding padding);
// Leading (top/left) zero padding applied along one axis.
int64_t conv_pad_before(int64_t in, int64_t window, int64_t stride,
                        Padding padding);

Tensor conv2d(const Tensor& input, const ConvSpec& spec);
Tensor pool(const Tensor& input, PoolMode mode, Extent window, Extent stride,
            Padding padding);
Tensor global_avg_pool(const Tensor& input);
Tensor relu(const Tensor& input);
Tensor batch_norm(const Tensor& input, const BatchNormParams& p);
Tensor concat_channels(std::span<const Tensor> inputs);
// Channels [begin, begin + count) of a tensor; inverse of concat_channels.
Tensor slice_channels(const Tensor& input, int64_t begin, int64_t count);
// Elementwise sum. `b` may have the same shape as `a` or be a vector that
// broadcasts over the last axis of `a`.
Tensor add(const Tensor& a, const Tensor& b);
Tensor fully_connected(const Tensor& x, const Tensor& W, const Tensor& b);
Tensor softmax(const Tensor& logits);
double cross_entropy(const Tensor& probs, std::span<const int> labels);
HeadGradients head_gradients(const Tensor& features, const Tensor& W,
                             const Tensor& b, std::span<const int> labels);
Tensor resize_bilinear(const Tensor& image, int64_t out_h, int64_t out_w);
Tensor normalize_pixels(const Tensor& image,
                        PixelNorm mode = PixelNorm::kSymmetric);

// Index of the largest element of each row of a [batch, k] tensor; ties
// resolve to the lowest index.
std::vector<int> argmax_rows(const Tensor& t);

}  // namespace canopy
