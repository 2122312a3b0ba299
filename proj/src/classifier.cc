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

#include "canopy/classifier.h"

#include <algorithm>
#include <numeric>

#include "canopy/error.h"
#include "canopy/graph.h"
#include "json.hpp"

namespace canopy {

std::vector<size_t> top_k_indices(std::span<const double> values, size_t k) {
  std::vector<size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](size_t a, size_t b) {
                      return values[a] != values[b] ? values[a] > values[b] : a < b;
                    });
  idx.resize(k);
  return idx;
}

Classifier::Classifier(ModelBundle bundle, SpeciesCatalog catalog)
    : bundle_(std::move(bundle)), catalog_(std::move(catalog)) {
  try {
    bundle_.graph.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid model: ") + e.what());
  }
  if (static_cast<int64_t>(bundle_.labels.size()) != bundle_.graph.num_classes()) {
    throw Error(ErrorCode::kConfig,
                "model has " + std::to_string(bundle_.graph.num_classes()) + " classes but " +
                    std::to_string(bundle_.labels.size()) + " labels");
  }
}

Classifier Classifier::load(const std::filesystem::path& bundle_path,
                            const std::optional<std::filesystem::path>& catalog_path,
                            const std::optional<std::filesystem::path>& labels_path) {
  ModelBundle bundle = [&] {
    try {
      return load_bundle(bundle_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("cannot load model: ") + e.what());
    }
  }();
  if (labels_path) {
    LabelList labels = [&] {
      try {
        return load_labels(*labels_path);
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, std::string("cannot load labels: ") + e.what());
      }
    }();
    if (!(labels == bundle.labels)) {
      throw Error(ErrorCode::kConfig,
                  labels_path->string() + " does not match the labels in " +
                      bundle_path.string());
    }
  }
  SpeciesCatalog catalog = catalog_path ? SpeciesCatalog::load(*catalog_path) : SpeciesCatalog{};
  return Classifier(std::move(bundle), std::move(catalog));
}

std::string Classifier::model_name() const {
  const auto& m = bundle_.graph.metadata();
  auto it = m.find("name");
  return it == m.end() ? "unnamed" : it->second;
}

std::string Classifier::model_version() const {
  const auto& m = bundle_.graph.metadata();
  auto it = m.find("version");
  return it == m.end() ? "0" : it->second;
}

Prediction Classifier::classify(std::span<const uint8_t> image_bytes, int k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  return classify(decode_image(image_bytes), k);
}

Prediction Classifier::classify(const RgbImage& image, int k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const Shape& in = bundle_.graph.input_shape();
  const Tensor probs = forward(bundle_.graph, prepare_input(image, in[0], in[1]));
  Prediction p;
  p.probabilities = probs.values();
  p.model_name = model_name();
  p.model_version = model_version();
  for (size_t i : top_k_indices(p.probabilities, static_cast<size_t>(k))) {
    const std::string& label = bundle_.labels[i];
    SpeciesEntry e = catalog_.lookup(label);
    p.predictions.push_back({label, p.probabilities[i], std::move(e.display_name),
                             std::move(e.description)});
  }
  return p;
}

std::string prediction_to_json(const Prediction& p) {
  nlohmann::json preds = nlohmann::json::array();
  for (const RankedLabel& r : p.predictions) {
    preds.push_back({{"label", r.label},
                     {"probability", r.probability},
                     {"display_name", r.display_name},
                     {"description", r.description}});
  }
  const nlohmann::json doc = {
      {"predictions", preds},
      {"model", {{"name", p.model_name}, {"version", p.model_version}}}};
  return doc.dump();
}

}  // namespace canopy
