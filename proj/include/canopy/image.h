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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "canopy/tensor.h"

namespace canopy {

// 8-bit interleaved RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // height * width * 3

  Tensor to_tensor() const;  // [1, height, width, 3], values in [0, 255]
};

// Decodes PNG or JPEG bytes (format sniffed from the signature). Grayscale
// sources are replicated to three channels; alpha is dropped.
RgbImage decode_image(std::span<const uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);

std::vector<uint8_t> encode_png(const RgbImage& image);
std::vector<uint8_t> encode_jpeg(const RgbImage& image, int quality = 90);
// Single-channel PNG; only used to exercise the grayscale decode path.
std::vector<uint8_t> encode_gray_png(int width, int height,
                                     std::span<const uint8_t> pixels);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const uint8_t> bytes);

// Network input from a decoded raster: bilinear resize to the target size
// followed by symmetric [-1, 1] normalization. [1, target_h, target_w, 3].
Tensor prepare_input(const RgbImage& image, int64_t target_h, int64_t target_w);

// Pixel-space augmentations on [1, h, w, c] tensors.
Tensor flip_horizontal(const Tensor& image);
Tensor adjust_brightness(const Tensor& image, double delta);

}  // namespace canopy
