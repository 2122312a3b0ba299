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

#include <filesystem>
#include <string_view>
#include <vector>

#include "canopy/labels.h"
#include "canopy/tensor.h"

namespace canopy {

enum class Split { kTrain, kValidation, kTest };

std::string_view split_name(Split split);

// Bucket for a file, from a stable 64-bit hash of its base name taken modulo
// 10000: [0, v) -> validation, [v, v + t) -> test, the rest -> train, where
// v and t are the fractions scaled to 10000. Depends on nothing but the name
// and the fractions.
Split assign_split(const std::filesystem::path& path,
                   double validation_fraction, double test_fraction);

struct DatasetImage {
  std::filesystem::path path;
  int label = 0;
  Split split = Split::kTrain;
};

// Scan of a `<root>/<class>/<image>` tree. Images are ordered by class, then
// by file name.
struct DatasetIndex {
  std::filesystem::path root;
  LabelList classes;
  std::vector<DatasetImage> images;

  size_t count(Split split) const;
  size_t count(Split split, int label) const;
};

bool has_image_extension(const std::filesystem::path& path);

DatasetIndex index_dataset(const std::filesystem::path& root,
                           double validation_fraction = 0.10,
                           double test_fraction = 0.10);

// Decode, bilinear resize to the target size, symmetric normalization.
// Returns [1, target_h, target_w, 3].
Tensor load_training_image(const std::filesystem::path& path, int64_t target_h,
                           int64_t target_w);

}  // namespace canopy
