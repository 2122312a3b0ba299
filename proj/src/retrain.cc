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

#include "canopy/retrain.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

#include "canopy/builders.h"
#include "canopy/bundle.h"
#include "canopy/error.h"
#include "canopy/hash.h"
#include "canopy/image.h"
#include "canopy/ops.h"
#include "canopy/random.h"
#include "json.hpp"

namespace canopy {

namespace fs = std::filesystem;

std::string_view augmentation_name(Augmentation a) {
  switch (a) {
    case Augmentation::kNone: return "none";
    case Augmentation::kFlip: return "flip";
    case Augmentation::kFlipBrightness: return "flip+brightness";
  }
  return "unknown";
}

Augmentation augmentation_from_name(std::string_view name) {
  if (name == "none") return Augmentation::kNone;
  if (name == "flip") return Augmentation::kFlip;
  if (name == "flip+brightness") return Augmentation::kFlipBrightness;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown augmentation '" + std::string(name) +
                  "' (expected none, flip or flip+brightness)");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be a finite non-negative number");
  }
  if (epochs < 1) fail("epochs must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 0.5)) {
    fail("validation_fraction must lie in [0, 0.5)");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 0.5)) {
    fail("test_fraction must lie in [0, 0.5)");
  }
}

// ---------------------------------------------------------------------------
// FeatureSet

void FeatureSet::append(const Tensor& row, int label, fs::path source) {
  const auto n = static_cast<int64_t>(row.size());
  if (empty() && width == 0) width = n;
  if (n != width) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature width " + std::to_string(n) + " != " + std::to_string(width));
  }
  rows.insert(rows.end(), row.data().begin(), row.data().end());
  labels.push_back(label);
  sources.push_back(std::move(source));
}

Tensor FeatureSet::matrix() const {
  if (empty()) throw Error(ErrorCode::kInvalidArgument, "feature set is empty");
  return Tensor({static_cast<int64_t>(size()), width}, rows);
}

Tensor FeatureSet::gather(std::span<const size_t> indices) const {
  if (indices.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gather");
  std::vector<double> out;
  out.reserve(indices.size() * static_cast<size_t>(width));
  for (size_t i : indices) {
    if (i >= size()) throw Error(ErrorCode::kOutOfRange, "feature row out of range");
    const auto* p = rows.data() + i * static_cast<size_t>(width);
    out.insert(out.end(), p, p + width);
  }
  return Tensor({static_cast<int64_t>(indices.size()), width}, std::move(out));
}

const FeatureSet& Bottlenecks::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kTest: return test;
  }
  return train;
}

// ---------------------------------------------------------------------------
// Bottleneck cache

namespace {

constexpr char kCacheMagic[4] = {'C', 'B', 'N', 'K'};

struct Variant {
  std::string tag;
  bool flip = false;
  double brightness = 0.0;
};

std::vector<Variant> variants_for(Split split, Augmentation aug, uint64_t seed,
                                  uint64_t content_hash) {
  std::vector<Variant> out{{"plain", false, 0.0}};
  if (split != Split::kTrain || aug == Augmentation::kNone) return out;
  out.push_back({"flip", true, 0.0});
  if (aug == Augmentation::kFlipBrightness) {
    Rng rng(seed ^ content_hash);
    const double delta = std::round(rng.uniform(-40.0, 40.0));
    out.push_back({"bright" + std::to_string(static_cast<int>(delta)), false, delta});
  }
  return out;
}

std::optional<std::vector<double>> read_cache(const fs::path& file,
                                              const std::string& key,
                                              bool& rejected) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  uint32_t key_len = 0;
  uint64_t width = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&key_len), sizeof key_len);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0 || key_len > 1024) {
    rejected = true;
    return std::nullopt;
  }
  std::string stored(key_len, '\0');
  in.read(stored.data(), key_len);
  in.read(reinterpret_cast<char*>(&width), sizeof width);
  if (!in || stored != key || width == 0 || width > (1u << 24)) {
    rejected = true;
    return std::nullopt;
  }
  std::vector<double> values(width);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(width * sizeof(double)));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    rejected = true;
    return std::nullopt;
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      rejected = true;
      return std::nullopt;
    }
  }
  return values;
}

void write_cache(const fs::path& file, const std::string& key, const Tensor& row) {
  // Write to a sibling temp file and rename so readers never see a torn entry.
  const fs::path tmp = file.string() + ".tmp" +
                       std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp.string());
    const auto key_len = static_cast<uint32_t>(key.size());
    const auto width = static_cast<uint64_t>(row.size());
    out.write(kCacheMagic, 4);
    out.write(reinterpret_cast<const char*>(&key_len), sizeof key_len);
    out.write(key.data(), key_len);
    out.write(reinterpret_cast<const char*>(&width), sizeof width);
    out.write(reinterpret_cast<const char*>(row.data().data()),
              static_cast<std::streamsize>(width * sizeof(double)));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, file);
}

struct JobResult {
  std::vector<Tensor> rows;  // one per variant, in variant order
  std::optional<std::string> warning;
  size_t forwards = 0;
  size_t hits = 0;
  size_t rejected = 0;
  std::exception_ptr error;
};

}  // namespace

std::string bottleneck_cache_key(std::span<const uint8_t> image_bytes,
                                 uint64_t graph_hash, std::string_view variant) {
  return to_hex(fnv1a64(image_bytes)) + to_hex(graph_hash) + "-" +
         std::string(variant);
}

Bottlenecks compute_bottlenecks(const CompGraph& graph, const DatasetIndex& index,
                                const fs::path& cache_dir,
                                const BottleneckOptions& options) {
  graph.validate();
  const Shape& in_shape = graph.input_shape();
  const uint64_t graph_hash = graph_fingerprint(graph);
  const bool use_cache = !cache_dir.empty();
  if (use_cache) fs::create_directories(cache_dir);

  const size_t n = index.images.size();
  std::vector<JobResult> results(n);

  auto run_job = [&](size_t i) {
    JobResult& r = results[i];
    const DatasetImage& img = index.images[i];
    try {
      std::vector<uint8_t> bytes;
      try {
        bytes = read_file(img.path);
      } catch (const Error& e) {
        r.warning = "skipping " + img.path.string() + ": " + e.what();
        return;
      }
      const uint64_t content_hash = fnv1a64(bytes);
      std::optional<Tensor> pixels;  // decoded lazily, only on a cache miss
      for (const Variant& v :
           variants_for(img.split, options.augmentation, options.seed, content_hash)) {
        const std::string key = bottleneck_cache_key(bytes, graph_hash, v.tag);
        const fs::path file = cache_dir / key;
        if (use_cache) {
          bool rejected = false;
          if (auto cached = read_cache(file, key, rejected)) {
            const auto width = static_cast<int64_t>(cached->size());
            r.rows.emplace_back(Shape{1, width}, std::move(*cached));
            ++r.hits;
            continue;
          }
          if (rejected) ++r.rejected;
        }
        if (!pixels) {
          try {
            pixels = decode_image(bytes).to_tensor();
          } catch (const Error& e) {
            r.warning = "skipping " + img.path.string() + ": " + e.what();
            r.rows.clear();
            return;
          }
        }
        Tensor t = *pixels;
        if (v.flip) t = flip_horizontal(t);
        if (v.brightness != 0.0) t = adjust_brightness(t, v.brightness);
        t = normalize_pixels(resize_bilinear(t, in_shape[0], in_shape[1]),
                             PixelNorm::kSymmetric);
        Tensor row = bottleneck(graph, t);
        ++r.forwards;
        if (use_cache) write_cache(file, key, row);
        r.rows.push_back(std::move(row));
      }
    } catch (...) {
      r.error = std::current_exception();
    }
  };

  size_t workers = options.threads > 0 ? static_cast<size_t>(options.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<size_t>(n, 1));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) run_job(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::jthread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) run_job(i);
      });
    }
  }

  Bottlenecks out;
  for (size_t i = 0; i < n; ++i) {
    JobResult& r = results[i];
    if (r.error) std::rethrow_exception(r.error);
    out.stats.forward_evaluations += r.forwards;
    out.stats.cache_hits += r.hits;
    out.stats.cache_rejected += r.rejected;
    if (r.warning) {
      ++out.stats.skipped;
      out.warnings.push_back(*r.warning);
      continue;
    }
    const DatasetImage& img = index.images[i];
    FeatureSet& dest = img.split == Split::kTrain        ? out.train
                       : img.split == Split::kValidation ? out.validation
                                                         : out.test;
    for (const Tensor& row : r.rows) dest.append(row, img.label, img.path);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training and evaluation

namespace {

std::vector<int> head_predictions(const Tensor& W, const Tensor& b,
                                  const FeatureSet& features) {
  return argmax_rows(softmax(fully_connected(features.matrix(), W, b)));
}

}  // namespace

TrainedHead train_head(const FeatureSet& train, int64_t num_classes,
                       const TrainConfig& config, const FeatureSet* validation) {
  config.validate();
  if (num_classes < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 classes");
  }
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "train split is empty");
  std::vector<size_t> per_class(static_cast<size_t>(num_classes), 0);
  for (int label : train.labels) {
    if (label < 0 || label >= num_classes) {
      throw Error(ErrorCode::kOutOfRange, "label " + std::to_string(label) +
                                              " outside [0, " +
                                              std::to_string(num_classes) + ")");
    }
    ++per_class[static_cast<size_t>(label)];
  }
  for (size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class " + std::to_string(c) + " has no examples in the train split");
    }
  }

  const int64_t d = train.width;
  TrainedHead head{Tensor({d, num_classes}), Tensor({num_classes}), {}};
  Rng rng(config.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const auto batch = static_cast<size_t>(config.batch_size);
  const double lr = config.learning_rate;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      std::span<const size_t> idx(order.data() + start, end - start);
      std::vector<int> labels;
      labels.reserve(idx.size());
      for (size_t i : idx) labels.push_back(train.labels[i]);
      const HeadGradients g = head_gradients(train.gather(idx), head.W, head.b, labels);
      loss_sum += g.loss * static_cast<double>(idx.size());
      if (lr != 0.0) {
        auto w = head.W.mutable_data();
        for (size_t j = 0; j < w.size(); ++j) w[j] -= lr * g.dW.data()[j];
        auto bb = head.b.mutable_data();
        for (size_t j = 0; j < bb.size(); ++j) bb[j] -= lr * g.db.data()[j];
        ensure_finite(head.W, "train_head");
        ensure_finite(head.b, "train_head");
      }
    }
    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy =
        score_predictions(head_predictions(head.W, head.b, train), train.labels,
                          num_classes).accuracy;
    if (validation != nullptr && !validation->empty()) {
      rec.validation_accuracy =
          score_predictions(head_predictions(head.W, head.b, *validation),
                            validation->labels, num_classes).accuracy;
    }
    head.history.push_back(rec);
  }
  // The exported bundle stores float32; keep the in-memory head identical.
  head.W = head.W.rounded_to_float();
  head.b = head.b.rounded_to_float();
  return head;
}

Evaluation score_predictions(std::span<const int> predictions,
                             std::span<const int> labels, int64_t num_classes) {
  if (labels.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot evaluate an empty split");
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and label counts differ");
  }
  const auto k = static_cast<size_t>(num_classes);
  Evaluation ev;
  ev.confusion.assign(k, std::vector<int64_t>(k, 0));
  int64_t correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto t = static_cast<size_t>(labels[i]);
    const auto p = static_cast<size_t>(predictions[i]);
    if (t >= k || p >= k) throw Error(ErrorCode::kOutOfRange, "class index out of range");
    ++ev.confusion[t][p];
    if (t == p) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  ev.predictions.assign(predictions.begin(), predictions.end());
  return ev;
}

Evaluation evaluate(const TrainedHead& head, const FeatureSet& features) {
  if (features.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot evaluate an empty split");
  return score_predictions(head_predictions(head.W, head.b, features),
                           features.labels, head.b.size());
}

Evaluation evaluate(const CompGraph& graph, const FeatureSet& features) {
  if (features.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot evaluate an empty split");
  const Node& fc = graph.node(classifier_node_id(graph));
  const Node& out = graph.node(graph.output_id());
  const Tensor x = features.matrix();
  const Tensor* fc_in[] = {&x};
  const Tensor logits = evaluate_node(fc, fc_in);
  const Tensor* sm_in[] = {&logits};
  const Tensor probs = evaluate_node(out, sm_in);
  return score_predictions(argmax_rows(probs), features.labels, graph.num_classes());
}

CompGraph install_head(const CompGraph& extractor, const TrainedHead& head) {
  extractor.validate();
  const int64_t width = extractor.infer_shapes()[static_cast<size_t>(extractor.bottleneck_id())].back();
  if (head.W.rank() != 2 || head.W.dim(0) != width) {
    throw Error(ErrorCode::kShapeMismatch,
                "head weights " + shape_to_string(head.W.shape()) +
                    " do not match bottleneck width " + std::to_string(width));
  }
  if (head.b.rank() != 1 || head.b.dim(0) != head.W.dim(1)) {
    throw Error(ErrorCode::kShapeMismatch,
                "head bias " + shape_to_string(head.b.shape()) + " does not match weights " +
                    shape_to_string(head.W.shape()));
  }
  CompGraph g = extractor;
  Node& fc = g.mutable_node(classifier_node_id(g));
  fc.params = {Param{"weights", head.W.rounded_to_float(), std::nullopt},
               Param{"bias", head.b.rounded_to_float(), std::nullopt}};
  g.metadata()["num_classes"] = std::to_string(head.W.dim(1));
  g.metadata()["head"] = "retrained";
  g.validate();
  return g;
}

ExportPaths export_retrained(const CompGraph& extractor, const TrainedHead& head,
                             const LabelList& labels, const fs::path& out_dir) {
  const CompGraph model = install_head(extractor, head);
  if (static_cast<int64_t>(labels.size()) != model.num_classes()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(labels.size()) + " labels for a " +
                    std::to_string(model.num_classes()) + "-class head");
  }
  fs::create_directories(out_dir);
  ExportPaths paths{out_dir / kModelFileName, out_dir / kLabelsFileName};
  save_bundle(model, labels, paths.model);
  emit_labels(labels, paths.labels);
  return paths;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

nlohmann::json evaluation_json(const Evaluation& ev) {
  return {{"accuracy", ev.accuracy}, {"confusion", ev.confusion}};
}

}  // namespace

std::string format_training_report(const RetrainResult& r, const TrainConfig& config) {
  using nlohmann::json;
  json history = json::array();
  for (const EpochRecord& e : r.head.history) {
    json rec = {{"train_loss", e.train_loss}, {"train_accuracy", e.train_accuracy}};
    rec["validation_accuracy"] =
        e.validation_accuracy ? json(*e.validation_accuracy) : json(nullptr);
    history.push_back(std::move(rec));
  }
  json counts = json::object();
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    counts[std::string(split_name(s))] = r.features.split(s).size();
  }
  json report = {
      {"config",
       {{"learning_rate", config.learning_rate},
        {"epochs", config.epochs},
        {"batch_size", config.batch_size},
        {"seed", config.seed},
        {"validation_fraction", config.validation_fraction},
        {"test_fraction", config.test_fraction},
        {"augmentation", std::string(augmentation_name(config.augmentation))}}},
      {"classes", r.index.classes.names()},
      {"examples", counts},
      {"bottlenecks",
       {{"forward_evaluations", r.features.stats.forward_evaluations},
        {"cache_hits", r.features.stats.cache_hits},
        {"cache_rejected", r.features.stats.cache_rejected},
        {"skipped", r.features.stats.skipped}}},
      {"warnings", r.features.warnings},
      {"history", history},
      {"train", evaluation_json(r.train_eval)},
      {"validation", r.validation_eval ? evaluation_json(*r.validation_eval) : json(nullptr)},
      {"test", r.test_eval ? evaluation_json(*r.test_eval) : json(nullptr)},
      {"model", r.paths.model.filename().string()},
      {"labels", r.paths.labels.filename().string()},
  };
  return report.dump(2) + "\n";
}

RetrainResult run_retrain(const fs::path& data_dir, const fs::path& out_dir,
                          const RetrainOptions& options) {
  const TrainConfig& config = options.train;
  config.validate();
  DatasetIndex index =
      index_dataset(data_dir, config.validation_fraction, config.test_fraction);
  const auto k = static_cast<int64_t>(index.classes.size());

  const CompGraph extractor = options.extractor_bundle
                                  ? load_bundle(*options.extractor_bundle).graph
                                  : build_mini_inception(k, options.extractor_seed);
  const fs::path cache = options.cache_dir.value_or(out_dir / "cache");
  Bottlenecks features = compute_bottlenecks(
      extractor, index, cache, {config.augmentation, config.seed, options.threads});

  const FeatureSet* val = features.validation.empty() ? nullptr : &features.validation;
  TrainedHead head = train_head(features.train, k, config, val);
  CompGraph model = install_head(extractor, head);
  ExportPaths paths = export_retrained(extractor, head, index.classes, out_dir);

  RetrainResult r{std::move(index), std::move(features), std::move(head),
                  std::move(model),  std::move(paths),    {}, {}, {}, {}};
  r.train_eval = evaluate(r.model, r.features.train);
  if (!r.features.validation.empty()) r.validation_eval = evaluate(r.model, r.features.validation);
  if (!r.features.test.empty()) r.test_eval = evaluate(r.model, r.features.test);

  r.report = out_dir / kReportFileName;
  const std::string text = format_training_report(r, config);
  write_file(r.report, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
  return r;
}

}  // namespace canopy
