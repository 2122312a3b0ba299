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
#include <string>
#include <vector>

#include "canopy/dataset.h"
#include "canopy/graph.h"
#include "canopy/labels.h"
#include "canopy/tensor.h"

namespace canopy {

enum class Augmentation { kNone, kFlip, kFlipBrightness };

std::string_view augmentation_name(Augmentation a);
Augmentation augmentation_from_name(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 40;
  int batch_size = 32;
  uint64_t seed = 0;
  double validation_fraction = 0.10;
  double test_fraction = 0.10;
  Augmentation augmentation = Augmentation::kNone;

  void validate() const;  // throws kInvalidArgument
};

// Row-major [n, width] features with their class labels. Unlike Tensor this
// may be empty, since a split can legitimately hold no images.
struct FeatureSet {
  int64_t width = 0;
  std::vector<double> rows;
  std::vector<int> labels;
  std::vector<std::filesystem::path> sources;

  size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  void append(const Tensor& row, int label, std::filesystem::path source);
  Tensor matrix() const;  // throws on an empty set
  Tensor gather(std::span<const size_t> indices) const;
};

struct BottleneckOptions {
  Augmentation augmentation = Augmentation::kNone;
  uint64_t seed = 0;  // brightness jitter
  int threads = 0;    // 0: hardware concurrency
};

struct BottleneckStats {
  size_t forward_evaluations = 0;
  size_t cache_hits = 0;
  size_t cache_rejected = 0;  // present but with a mismatched key
  size_t skipped = 0;         // undecodable images
};

struct Bottlenecks {
  FeatureSet train;
  FeatureSet validation;
  FeatureSet test;
  BottleneckStats stats;
  std::vector<std::string> warnings;

  const FeatureSet& split(Split s) const;
};

// Cache key for one feature vector: image content hash, graph fingerprint
// and augmentation variant, as 32+ hex characters.
std::string bottleneck_cache_key(std::span<const uint8_t> image_bytes,
                                 uint64_t graph_hash, std::string_view variant);

// Features at the graph's bottleneck for every indexed image. Augmented
// copies are added to the train split only. With an empty cache_dir no cache
// is used.
Bottlenecks compute_bottlenecks(const CompGraph& graph, const DatasetIndex& index,
                                const std::filesystem::path& cache_dir,
                                const BottleneckOptions& options = {});

struct EpochRecord {
  double train_loss = 0.0;  // mean per-example loss over the epoch's batches
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
};

struct TrainedHead {
  Tensor W;  // [d, k]
  Tensor b;  // [k]
  std::vector<EpochRecord> history;
};

TrainedHead train_head(const FeatureSet& train, int64_t num_classes,
                       const TrainConfig& config,
                       const FeatureSet* validation = nullptr);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<std::vector<int64_t>> confusion;  // [true][predicted]
  std::vector<int> predictions;
};

Evaluation score_predictions(std::span<const int> predictions,
                             std::span<const int> labels, int64_t num_classes);
Evaluation evaluate(const TrainedHead& head, const FeatureSet& features);
// Uses the classifier weights installed in the graph.
Evaluation evaluate(const CompGraph& graph, const FeatureSet& features);

// Copy of the extractor with W and b installed at the final fully connected
// node; the class count follows the head.
CompGraph install_head(const CompGraph& extractor, const TrainedHead& head);

struct ExportPaths {
  std::filesystem::path model;
  std::filesystem::path labels;
};

inline constexpr const char* kModelFileName = "model.trmb";
inline constexpr const char* kLabelsFileName = "labels.txt";

ExportPaths export_retrained(const CompGraph& extractor, const TrainedHead& head,
                             const LabelList& labels,
                             const std::filesystem::path& out_dir);

struct RetrainOptions {
  TrainConfig train;
  uint64_t extractor_seed = 42;
  std::optional<std::filesystem::path> extractor_bundle;
  std::optional<std::filesystem::path> cache_dir;  // default: <out>/cache
  int threads = 0;
};

struct RetrainResult {
  DatasetIndex index;
  Bottlenecks features;
  TrainedHead head;
  CompGraph model;
  ExportPaths paths;
  std::filesystem::path report;
  Evaluation train_eval;
  std::optional<Evaluation> validation_eval;
  std::optional<Evaluation> test_eval;
};

inline constexpr const char* kReportFileName = "report.json";

// index -> bottlenecks -> train -> evaluate -> export, plus report.json.
RetrainResult run_retrain(const std::filesystem::path& data_dir,
                          const std::filesystem::path& out_dir,
                          const RetrainOptions& options);

std::string format_training_report(const RetrainResult& result,
                                   const TrainConfig& config);

}  // namespace canopy
