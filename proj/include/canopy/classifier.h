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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "canopy/bundle.h"
#include "canopy/catalog.h"
#include "canopy/image.h"

namespace canopy {

struct RankedLabel {
  std::string label;
  double probability = 0.0;
  std::string display_name;
  std::string description;
};

struct Prediction {
  std::vector<RankedLabel> predictions;  // descending probability
  std::vector<double> probabilities;     // the full softmax row, label order
  std::string model_name;
  std::string model_version;
};

// Immutable after construction; classify may run concurrently.
class Classifier {
 public:
  // Throws kConfig when the labels do not cover the graph's classes.
  Classifier(ModelBundle bundle, SpeciesCatalog catalog);

  // A separate labels file, when given, must equal the bundle's labels.
  static Classifier load(const std::filesystem::path& bundle_path,
                         const std::optional<std::filesystem::path>& catalog_path = {},
                         const std::optional<std::filesystem::path>& labels_path = {});

  // decode -> resize to the input size -> normalize -> forward -> top k.
  // Ties are ordered by ascending label. k is clamped to the class count.
  Prediction classify(std::span<const uint8_t> image_bytes, int k) const;
  Prediction classify(const RgbImage& image, int k) const;

  const CompGraph& graph() const noexcept { return bundle_.graph; }
  const LabelList& labels() const noexcept { return bundle_.labels; }
  const SpeciesCatalog& catalog() const noexcept { return catalog_; }
  std::string model_name() const;
  std::string model_version() const;

 private:
  ModelBundle bundle_;
  SpeciesCatalog catalog_;
};

// Indices of the k largest values, ties by ascending index.
std::vector<size_t> top_k_indices(std::span<const double> values, size_t k);

std::string prediction_to_json(const Prediction& p);

}  // namespace canopy
