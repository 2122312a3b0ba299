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
#include <string>
#include <vector>

namespace canopy {

// The six tree classes of the reference dataset, sorted.
const std::vector<std::string>& default_tree_classes();

struct SyntheticOptions {
  std::vector<std::string> classes = default_tree_classes();
  int per_class = 10;
  int size = 64;
  uint64_t seed = 2024;
  double noise = 18.0;  // per-pixel Gaussian sigma in 0..255 units
};

// Writes `<root>/<class>/<class>_NN.png`: each class has its own dominant
// hue, each image jitters saturation and value, adds a darker blob and
// pixel noise. Returns the written paths in class order.
std::vector<std::filesystem::path> write_synthetic_dataset(
    const std::filesystem::path& root, const SyntheticOptions& options = {});

}  // namespace canopy
