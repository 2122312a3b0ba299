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

#include "canopy/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "canopy/error.h"

namespace canopy {
namespace {

[[noreturn]] void shape_error(const std::string& msg) {
  throw Error(ErrorCode::kShapeMismatch, msg);
}

void require_rank(const Tensor& t, int rank, const char* op) {
  if (t.rank() != rank) {
    shape_error(std::string(op) + ": expected a " + std::to_string(rank) +
                "-D tensor, got shape " + shape_to_string(t.shape()));
  }
}

void require_positive(Extent e, const char* what, const char* op) {
  if (e.h < 1 || e.w < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(op) + ": " + what + " must be positive, got " +
                    std::to_string(e.h) + "x" + std::to_string(e.w));
  }
}

}  // namespace

int64_t conv_output_size(int64_t in, int64_t window, int64_t stride,
                         Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (window > in) return 0;
  return (in - window) / stride + 1;
}

int64_t conv_pad_before(int64_t in, int64_t window, int64_t stride,
                        Padding padding) {
  if (padding == Padding::kValid) return 0;
  const int64_t out = conv_output_size(in, window, stride, padding);
  const int64_t total = std::max<int64_t>((out - 1) * stride + window - in, 0);
  return total / 2;
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
  require_rank(input, 4, "conv2d");
  require_rank(spec.kernel, 4, "conv2d kernel");
  require_positive(spec.stride, "stride", "conv2d");
  const int64_t n = input.dim(0), ih = input.dim(1), iw = input.dim(2),
                ic = input.dim(3);
  const int64_t kh = spec.kernel.dim(0), kw = spec.kernel.dim(1),
                kc = spec.kernel.dim(2), oc = spec.kernel.dim(3);
  if (kc != ic) {
    shape_error("conv2d: input has " + std::to_string(ic) +
                " channels but kernel " + shape_to_string(spec.kernel.shape()) +
                " expects " + std::to_string(kc));
  }
  if (spec.bias && spec.bias->shape() != Shape{oc}) {
    shape_error("conv2d: bias shape " + shape_to_string(spec.bias->shape()) +
                " does not match " + std::to_string(oc) + " output channels");
  }
  const int64_t oh = conv_output_size(ih, kh, spec.stride.h, spec.padding);
  const int64_t ow = conv_output_size(iw, kw, spec.stride.w, spec.padding);
  if (oh < 1 || ow < 1) {
    shape_error("conv2d: kernel " + std::to_string(kh) + "x" +
                std::to_string(kw) + " does not fit input " +
                std::to_string(ih) + "x" + std::to_string(iw) +
                " under valid padding");
  }
  const int64_t pt = conv_pad_before(ih, kh, spec.stride.h, spec.padding);
  const int64_t pl = conv_pad_before(iw, kw, spec.stride.w, spec.padding);

  Tensor out({n, oh, ow, oc});
  std::vector<double> acc(static_cast<size_t>(oc));
  const auto in = input.data();
  const auto k = spec.kernel.data();
  auto o = out.mutable_data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t x = 0; x < ow; ++x) {
        if (spec.bias) {
          std::copy(spec.bias->data().begin(), spec.bias->data().end(),
                    acc.begin());
        } else {
          std::fill(acc.begin(), acc.end(), 0.0);
        }
        for (int64_t dy = 0; dy < kh; ++dy) {
          const int64_t sy = y * spec.stride.h + dy - pt;
          if (sy < 0 || sy >= ih) continue;
          for (int64_t dx = 0; dx < kw; ++dx) {
            const int64_t sx = x * spec.stride.w + dx - pl;
            if (sx < 0 || sx >= iw) continue;
            const double* px = &in[static_cast<size_t>(((b * ih + sy) * iw + sx) * ic)];
            const double* kp = &k[static_cast<size_t>((dy * kw + dx) * ic * oc)];
            for (int64_t c = 0; c < ic; ++c) {
              const double v = px[c];
              const double* kr = kp + c * oc;
              for (int64_t f = 0; f < oc; ++f) acc[f] += v * kr[f];
            }
          }
        }
        std::copy(acc.begin(), acc.end(),
                  o.begin() + ((b * oh + y) * ow + x) * oc);
      }
    }
  }
  ensure_finite(out, "conv2d");
  return out;
}

Tensor pool(const Tensor& input, PoolMode mode, Extent window, Extent stride,
            Padding padding) {
  require_rank(input, 4, "pool");
  require_positive(window, "window", "pool");
  require_positive(stride, "stride", "pool");
  const int64_t n = input.dim(0), ih = input.dim(1), iw = input.dim(2),
                c = input.dim(3);
  const int64_t oh = conv_output_size(ih, window.h, stride.h, padding);
  const int64_t ow = conv_output_size(iw, window.w, stride.w, padding);
  if (oh < 1 || ow < 1) {
    shape_error("pool: window " + std::to_string(window.h) + "x" +
                std::to_string(window.w) + " is larger than input " +
                std::to_string(ih) + "x" + std::to_string(iw) +
                " under valid padding");
  }
  const int64_t pt = conv_pad_before(ih, window.h, stride.h, padding);
  const int64_t pl = conv_pad_before(iw, window.w, stride.w, padding);
  Tensor out({n, oh, ow, c});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t y = 0; y < oh; ++y) {
      const int64_t y0 = std::max<int64_t>(y * stride.h - pt, 0);
      const int64_t y1 = std::min<int64_t>(y * stride.h - pt + window.h, ih);
      for (int64_t x = 0; x < ow; ++x) {
        const int64_t x0 = std::max<int64_t>(x * stride.w - pl, 0);
        const int64_t x1 = std::min<int64_t>(x * stride.w - pl + window.w, iw);
        const double count = static_cast<double>((y1 - y0) * (x1 - x0));
        for (int64_t ch = 0; ch < c; ++ch) {
          double acc = mode == PoolMode::kMax
                           ? -std::numeric_limits<double>::infinity()
                           : 0.0;
          for (int64_t sy = y0; sy < y1; ++sy) {
            for (int64_t sx = x0; sx < x1; ++sx) {
              const double v = input.at(b, sy, sx, ch);
              acc = mode == PoolMode::kMax ? std::max(acc, v) : acc + v;
            }
          }
          out.at(b, y, x, ch) = mode == PoolMode::kMax ? acc : acc / count;
        }
      }
    }
  }
  ensure_finite(out, "pool");
  return out;
}

Tensor global_avg_pool(const Tensor& input) {
  require_rank(input, 4, "global_avg_pool");
  const int64_t n = input.dim(0), h = input.dim(1), w = input.dim(2),
                c = input.dim(3);
  Tensor out({n, c});
  std::vector<double> acc(static_cast<size_t>(c));
  for (int64_t b = 0; b < n; ++b) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        for (int64_t ch = 0; ch < c; ++ch) acc[ch] += input.at(b, y, x, ch);
      }
    }
    for (int64_t ch = 0; ch < c; ++ch) {
      out[b * c + ch] = acc[ch] / static_cast<double>(h * w);
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.mutable_data()) v = std::max(v, 0.0);
  return out;
}

Tensor batch_norm(const Tensor& input, const BatchNormParams& p) {
  const int64_t c = input.shape().back();
  for (const Tensor* t : {&p.mean, &p.variance, &p.gamma, &p.beta}) {
    if (t->shape() != Shape{c}) {
      shape_error("batch_norm: parameter shape " + shape_to_string(t->shape()) +
                  " does not match " + std::to_string(c) + " input channels");
    }
  }
  if (!(p.epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "batch_norm: epsilon must be > 0");
  }
  std::vector<double> scale(static_cast<size_t>(c)), shift(static_cast<size_t>(c));
  for (int64_t ch = 0; ch < c; ++ch) {
    if (p.variance[ch] < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "batch_norm: negative variance in channel " +
                      std::to_string(ch));
    }
    const double inv = 1.0 / std::sqrt(p.variance[ch] + p.epsilon);
    scale[ch] = p.gamma[ch] * inv;
    shift[ch] = p.beta[ch];
  }
  Tensor out = input;
  auto o = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) {
    const int64_t ch = i % c;
    o[i] = scale[ch] * (o[i] - p.mean[ch]) + shift[ch];
  }
  ensure_finite(out, "batch_norm");
  return out;
}

Tensor concat_channels(std::span<const Tensor> inputs) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "concat_channels: no inputs");
  }
  const Shape& first = inputs[0].shape();
  int64_t channels = 0;
  for (const Tensor& t : inputs) {
    if (t.rank() != static_cast<int>(first.size()) ||
        !std::equal(first.begin(), first.end() - 1, t.shape().begin())) {
      shape_error("concat_channels: shape " + shape_to_string(t.shape()) +
                  " does not match leading dimensions of " +
                  shape_to_string(first));
    }
    channels += t.shape().back();
  }
  Shape shape = first;
  shape.back() = channels;
  const int64_t rows = shape_elements(first) / first.back();
  std::vector<double> data;
  data.reserve(static_cast<size_t>(rows * channels));
  for (int64_t r = 0; r < rows; ++r) {
    for (const Tensor& t : inputs) {
      const int64_t c = t.shape().back();
      const auto src = t.data().subspan(static_cast<size_t>(r * c),
                                        static_cast<size_t>(c));
      data.insert(data.end(), src.begin(), src.end());
    }
  }
  return Tensor(std::move(shape), std::move(data));
}

Tensor slice_channels(const Tensor& input, int64_t begin, int64_t count) {
  const int64_t c = input.shape().back();
  if (begin < 0 || count < 1 || begin + count > c) {
    throw Error(ErrorCode::kOutOfRange,
                "slice_channels: range [" + std::to_string(begin) + ", " +
                    std::to_string(begin + count) + ") outside " +
                    std::to_string(c) + " channels");
  }
  Shape shape = input.shape();
  shape.back() = count;
  const int64_t rows = input.size() / c;
  std::vector<double> data;
  data.reserve(static_cast<size_t>(rows * count));
  for (int64_t r = 0; r < rows; ++r) {
    const auto src = input.data().subspan(static_cast<size_t>(r * c + begin),
                                          static_cast<size_t>(count));
    data.insert(data.end(), src.begin(), src.end());
  }
  return Tensor(std::move(shape), std::move(data));
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  auto o = out.mutable_data();
  if (a.shape() == b.shape()) {
    for (int64_t i = 0; i < out.size(); ++i) o[i] += b[i];
  } else if (b.rank() == 1 && b.dim(0) == a.shape().back()) {
    const int64_t c = b.dim(0);
    for (int64_t i = 0; i < out.size(); ++i) o[i] += b[i % c];
  } else {
    shape_error("add: cannot combine shapes " + shape_to_string(a.shape()) +
                " and " + shape_to_string(b.shape()));
  }
  ensure_finite(out, "add");
  return out;
}

Tensor fully_connected(const Tensor& x, const Tensor& W, const Tensor& b) {
  require_rank(x, 2, "fully_connected");
  require_rank(W, 2, "fully_connected weights");
  const int64_t n = x.dim(0), d = x.dim(1), k = W.dim(1);
  if (W.dim(0) != d) {
    shape_error("fully_connected: input width " + std::to_string(d) +
                " does not match weights " + shape_to_string(W.shape()));
  }
  if (b.shape() != Shape{k}) {
    shape_error("fully_connected: bias shape " + shape_to_string(b.shape()) +
                " does not match " + std::to_string(k) + " outputs");
  }
  Tensor out({n, k});
  std::vector<double> acc(static_cast<size_t>(k));
  for (int64_t r = 0; r < n; ++r) {
    std::copy(b.data().begin(), b.data().end(), acc.begin());
    for (int64_t i = 0; i < d; ++i) {
      const double v = x[r * d + i];
      for (int64_t j = 0; j < k; ++j) acc[j] += v * W[i * k + j];
    }
    std::copy(acc.begin(), acc.end(), out.mutable_data().begin() + r * k);
  }
  ensure_finite(out, "fully_connected");
  return out;
}

Tensor softmax(const Tensor& logits) {
  require_rank(logits, 2, "softmax");
  const int64_t n = logits.dim(0), k = logits.dim(1);
  Tensor out({n, k});
  for (int64_t r = 0; r < n; ++r) {
    const auto row = logits.data().subspan(static_cast<size_t>(r * k),
                                           static_cast<size_t>(k));
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (int64_t j = 0; j < k; ++j) {
      const double e = std::exp(row[j] - m);
      out[r * k + j] = e;
      sum += e;
    }
    for (int64_t j = 0; j < k; ++j) out[r * k + j] /= sum;
  }
  return out;
}

namespace {

void check_labels(std::span<const int> labels, int64_t n, int64_t k,
                  const char* op) {
  if (static_cast<int64_t>(labels.size()) != n) {
    shape_error(std::string(op) + ": " + std::to_string(labels.size()) +
                " labels for a batch of " + std::to_string(n));
  }
  for (int label : labels) {
    if (label < 0 || label >= k) {
      throw Error(ErrorCode::kOutOfRange,
                  std::string(op) + ": label " + std::to_string(label) +
                      " outside [0, " + std::to_string(k) + ")");
    }
  }
}

constexpr double kProbFloor = 1e-12;

}  // namespace

double cross_entropy(const Tensor& probs, std::span<const int> labels) {
  require_rank(probs, 2, "cross_entropy");
  const int64_t n = probs.dim(0), k = probs.dim(1);
  check_labels(labels, n, k, "cross_entropy");
  double total = 0.0;
  for (int64_t r = 0; r < n; ++r) {
    total -= std::log(std::max(probs[r * k + labels[r]], kProbFloor));
  }
  return total / static_cast<double>(n);
}

HeadGradients head_gradients(const Tensor& features, const Tensor& W,
                             const Tensor& b, std::span<const int> labels) {
  const Tensor probs = softmax(fully_connected(features, W, b));
  const int64_t n = features.dim(0), d = features.dim(1), k = W.dim(1);
  check_labels(labels, n, k, "head_gradients");

  HeadGradients g{Tensor({d, k}), Tensor({k}), cross_entropy(probs, labels)};
  Tensor dlogits = probs;
  for (int64_t r = 0; r < n; ++r) {
    dlogits[r * k + labels[r]] -= 1.0;
  }
  for (double& v : dlogits.mutable_data()) v /= static_cast<double>(n);
  for (int64_t r = 0; r < n; ++r) {
    for (int64_t i = 0; i < d; ++i) {
      const double f = features[r * d + i];
      for (int64_t j = 0; j < k; ++j) g.dW[i * k + j] += f * dlogits[r * k + j];
    }
    for (int64_t j = 0; j < k; ++j) g.db[j] += dlogits[r * k + j];
  }
  return g;
}

Tensor resize_bilinear(const Tensor& image, int64_t out_h, int64_t out_w) {
  require_rank(image, 4, "resize_bilinear");
  if (out_h < 1 || out_w < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "resize_bilinear: target size must be positive, got " +
                    std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  const int64_t n = image.dim(0), ih = image.dim(1), iw = image.dim(2),
                c = image.dim(3);
  if (ih == out_h && iw == out_w) return image;

  struct Tap {
    int64_t lo, hi;
    double frac;
  };
  auto taps = [](int64_t in, int64_t out) {
    std::vector<Tap> t(static_cast<size_t>(out));
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (int64_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<int64_t>(std::floor(src));
      t[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(ih, out_h);
  const auto tx = taps(iw, out_w);
  Tensor out({n, out_h, out_w, c});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t y = 0; y < out_h; ++y) {
      const Tap& vy = ty[y];
      for (int64_t x = 0; x < out_w; ++x) {
        const Tap& vx = tx[x];
        for (int64_t ch = 0; ch < c; ++ch) {
          const double top = image.at(b, vy.lo, vx.lo, ch) * (1.0 - vx.frac) +
                             image.at(b, vy.lo, vx.hi, ch) * vx.frac;
          const double bottom = image.at(b, vy.hi, vx.lo, ch) * (1.0 - vx.frac) +
                                image.at(b, vy.hi, vx.hi, ch) * vx.frac;
          out.at(b, y, x, ch) = top * (1.0 - vy.frac) + bottom * vy.frac;
        }
      }
    }
  }
  return out;
}

Tensor normalize_pixels(const Tensor& image, PixelNorm mode) {
  Tensor out = image;
  for (double& v : out.mutable_data()) {
    v = mode == PixelNorm::kUnit ? v / 255.0 : v / 127.5 - 1.0;
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& t) {
  require_rank(t, 2, "argmax_rows");
  const int64_t n = t.dim(0), k = t.dim(1);
  std::vector<int> out(static_cast<size_t>(n));
  for (int64_t r = 0; r < n; ++r) {
    int64_t best = 0;
    for (int64_t j = 1; j < k; ++j) {
      if (t[r * k + j] > t[r * k + best]) best = j;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace canopy
