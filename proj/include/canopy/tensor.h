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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace canopy {

using Shape = std::vector<int64_t>;

std::string shape_to_string(const Shape& shape);
int64_t shape_elements(const Shape& shape);

// Dense row-major tensor of up to four dimensions. Images are laid out as
// [batch, height, width, channel]; feature matrices as [batch, feature].
// Values are held in double precision and are always finite.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar_vector(std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const;
  int64_t size() const noexcept { return static_cast<int64_t>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> mutable_data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }

  // 4-D accessors for [n, h, w, c] tensors.
  double at(int64_t n, int64_t h, int64_t w, int64_t c) const;
  double& at(int64_t n, int64_t h, int64_t w, int64_t c);

  // Same data under a different shape with the same element count.
  Tensor reshaped(Shape shape) const;

  // Copy with every element rounded to the nearest float32 value. Graph
  // constants are kept at float32 precision so that serialization is exact.
  Tensor rounded_to_float() const;
  bool is_float_representable() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Throws ErrorCode::kOutOfRange naming `op` if any element is NaN or Inf.
void ensure_finite(const Tensor& t, const char* op);

double max_abs_difference(const Tensor& a, const Tensor& b);

}  // namespace canopy
