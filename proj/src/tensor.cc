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

#include "canopy/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "canopy/error.h"

namespace canopy {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

int64_t shape_elements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor rank must be 1..4, got shape " + shape_to_string(shape));
  }
  for (int64_t d : shape) {
    if (d <= 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor dimensions must be positive, got " +
                      shape_to_string(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  if (!std::isfinite(fill)) {
    throw Error(ErrorCode::kOutOfRange, "tensor fill value is not finite");
  }
  data_.assign(static_cast<size_t>(shape_elements(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (shape_elements(shape_) != static_cast<int64_t>(data_.size())) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + shape_to_string(shape_) + " holds " +
                    std::to_string(shape_elements(shape_)) +
                    " elements but data has " + std::to_string(data_.size()));
  }
  ensure_finite(*this, "Tensor");
}

Tensor Tensor::scalar_vector(std::initializer_list<double> values) {
  return Tensor({static_cast<int64_t>(values.size())},
                std::vector<double>(values));
}

int64_t Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw Error(ErrorCode::kOutOfRange,
                "axis " + std::to_string(axis) + " out of range for shape " +
                    shape_to_string(shape_));
  }
  return shape_[static_cast<size_t>(axis)];
}

double Tensor::at(int64_t n, int64_t h, int64_t w, int64_t c) const {
  return data_[static_cast<size_t>(((n * shape_[1] + h) * shape_[2] + w) *
                                       shape_[3] +
                                   c)];
}

double& Tensor::at(int64_t n, int64_t h, int64_t w, int64_t c) {
  return data_[static_cast<size_t>(((n * shape_[1] + h) * shape_[2] + w) *
                                       shape_[3] +
                                   c)];
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::rounded_to_float() const {
  Tensor out = *this;
  for (double& v : out.data_) v = static_cast<double>(static_cast<float>(v));
  return out;
}

bool Tensor::is_float_representable() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) {
    return static_cast<double>(static_cast<float>(v)) == v;
  });
}

void ensure_finite(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kOutOfRange,
                  std::string(op) + ": produced a non-finite value");
    }
  }
}

double max_abs_difference(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cannot compare shapes " + shape_to_string(a.shape()) +
                    " and " + shape_to_string(b.shape()));
  }
  double m = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace canopy
