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

#include "canopy/cli.h"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "canopy/bundle.h"
#include "canopy/classifier.h"
#include "canopy/error.h"
#include "canopy/hash.h"
#include "canopy/optimizer.h"
#include "canopy/retrain.h"
#include "canopy/service.h"
#include "json.hpp"

namespace canopy {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

std::string dtype_of(const Param& p) {
  if (p.quant) return "int8";
  return p.value.is_float_representable() ? "float32" : "float64";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = text.find(',', start);
    const size_t end = comma == std::string::npos ? text.size() : comma;
    std::string item = text.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string inspect_bundle_json(const std::string& bundle_path) {
  const std::vector<uint8_t> bytes = read_file(bundle_path);
  const ModelBundle b = parse_bundle(bytes);
  const BundleLayout layout = bundle_layout(bytes);
  const CompGraph& g = b.graph;
  const std::vector<Shape> shapes = g.infer_shapes();

  json topology = json::array();
  std::map<std::string, int64_t> weights_by_dtype;
  for (const Node& n : g.nodes()) {
    json params = json::array();
    for (const Param& p : n.params) {
      const std::string dtype = dtype_of(p);
      weights_by_dtype[dtype] += p.value.size();
      params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"dtype", dtype}});
    }
    topology.push_back({{"id", n.id},
                        {"kind", op_kind_name(n.kind)},
                        {"name", n.name},
                        {"inputs", n.inputs},
                        {"output_shape", shapes[static_cast<size_t>(n.id)]},
                        {"params", params}});
  }
  const json doc = {
      {"metadata", g.metadata()},
      {"input_shape", g.input_shape()},
      {"num_classes", g.num_classes()},
      {"labels", b.labels.names()},
      {"nodes", g.size()},
      {"input_id", g.input_id()},
      {"bottleneck_id", g.bottleneck_id()},
      {"output_id", g.output_id()},
      {"parameters", g.parameter_count()},
      {"quantized", g.is_quantized()},
      {"weights_by_dtype", weights_by_dtype},
      {"bytes",
       {{"total", layout.total_bytes},
        {"manifest", layout.manifest_bytes},
        {"payload", layout.payload_bytes}}},
      {"fingerprint", to_hex(graph_fingerprint(g))},
      {"topology", topology}};
  return doc.dump(2);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"canopy: tree species recognition toolkit", "canopy"};
  app.require_subcommand(1);
  app.fallthrough(false);

  // retrain
  std::string data_dir, out_dir, extractor, cache_dir, augment = "none";
  RetrainOptions retrain;
  auto* c_retrain = app.add_subcommand("retrain", "Train the classifier head on data/<class>/ images");
  c_retrain->add_option("--data", data_dir, "Dataset root (one folder per class)")
      ->required()->envname("CANOPY_DATA");
  c_retrain->add_option("--out", out_dir, "Output directory for model.trmb, labels.txt, report.json")
      ->required()->envname("CANOPY_OUT");
  c_retrain->add_option("--learning-rate", retrain.train.learning_rate, "SGD learning rate")
      ->capture_default_str();
  c_retrain->add_option("--epochs", retrain.train.epochs, "Training epochs")->capture_default_str();
  c_retrain->add_option("--batch-size", retrain.train.batch_size, "Mini-batch size")
      ->capture_default_str();
  c_retrain->add_option("--seed", retrain.train.seed, "Shuffle and augmentation seed")
      ->capture_default_str();
  c_retrain->add_option("--validation-fraction", retrain.train.validation_fraction)
      ->capture_default_str();
  c_retrain->add_option("--test-fraction", retrain.train.test_fraction)->capture_default_str();
  c_retrain->add_option("--augment", augment, "none, flip or flip+brightness")
      ->capture_default_str();
  c_retrain->add_option("--extractor", extractor, "Bundle to use as the frozen feature extractor");
  c_retrain->add_option("--extractor-seed", retrain.extractor_seed,
                        "Seed of the default MiniInception extractor")
      ->capture_default_str();
  c_retrain->add_option("--cache-dir", cache_dir, "Bottleneck cache (default <out>/cache)")
      ->envname("CANOPY_CACHE_DIR");
  c_retrain->add_option("--threads", retrain.threads, "Feature worker threads (0: all cores)")
      ->envname("CANOPY_THREADS");

  // optimize
  std::string opt_in, opt_out, passes, report_path;
  auto* c_opt = app.add_subcommand("optimize", "Run optimizer passes over a bundle");
  c_opt->add_option("--in", opt_in, "Input bundle")->required()->envname("CANOPY_MODEL");
  c_opt->add_option("--out", opt_out, "Output bundle")->required();
  c_opt->add_option("--passes", passes, "Comma-separated pass list (default: all, in order)");
  c_opt->add_option("--report", report_path, "Also write the pass report to this file");

  // classify
  std::string model, image, catalog, labels;
  int top = 3;
  auto* c_cls = app.add_subcommand("classify", "Classify one image");
  c_cls->add_option("--model", model, "Model bundle")->required()->envname("CANOPY_MODEL");
  c_cls->add_option("--image", image, "Image file (JPEG or PNG)")->required();
  c_cls->add_option("--top", top, "Number of ranked labels")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_cls->add_option("--catalog", catalog, "Species catalog JSON")->envname("CANOPY_CATALOG");
  c_cls->add_option("--labels", labels, "Label file that must match the bundle")
      ->envname("CANOPY_LABELS");

  // inspect
  std::string inspect_model;
  auto* c_inspect = app.add_subcommand("inspect", "Describe a bundle");
  c_inspect->add_option("--model", inspect_model, "Model bundle")->required()
      ->envname("CANOPY_MODEL");

  // serve
  std::string serve_model, serve_catalog, serve_labels, listen = "127.0.0.1:8080",
                                                        static_dir;
  ServiceConfig service;
  auto* c_serve = app.add_subcommand("serve", "Serve the HTTP API");
  c_serve->add_option("--model", serve_model, "Model bundle")->required()
      ->envname("CANOPY_MODEL");
  c_serve->add_option("--catalog", serve_catalog, "Species catalog JSON")->required()
      ->envname("CANOPY_CATALOG");
  c_serve->add_option("--labels", serve_labels, "Label file that must match the bundle")
      ->envname("CANOPY_LABELS");
  c_serve->add_option("--listen", listen, "host:port")->capture_default_str()
      ->envname("CANOPY_LISTEN");
  c_serve->add_option("--max-upload-bytes", service.max_upload_bytes)->capture_default_str()
      ->envname("CANOPY_MAX_UPLOAD_BYTES")->check(CLI::PositiveNumber);
  c_serve->add_option("--cors-origin", service.cors_origin)->capture_default_str()
      ->envname("CANOPY_CORS_ORIGIN");
  c_serve->add_option("--static", static_dir, "Directory of static UI assets")
      ->envname("CANOPY_STATIC_DIR");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0) err << app.help();
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*c_retrain) {
      retrain.train.augmentation = augmentation_from_name(augment);
      if (!extractor.empty()) retrain.extractor_bundle = extractor;
      if (!cache_dir.empty()) retrain.cache_dir = cache_dir;
      const RetrainResult r = run_retrain(data_dir, out_dir, retrain);
      for (const std::string& w : r.features.warnings) err << "warning: " << w << "\n";
      json summary = {{"model", r.paths.model.string()},
                      {"labels", r.paths.labels.string()},
                      {"report", r.report.string()},
                      {"train_accuracy", r.train_eval.accuracy}};
      summary["validation_accuracy"] =
          r.validation_eval ? json(r.validation_eval->accuracy) : json(nullptr);
      summary["test_accuracy"] = r.test_eval ? json(r.test_eval->accuracy) : json(nullptr);
      out << summary.dump(2) << "\n";
    } else if (*c_opt) {
      const ModelBundle in = load_bundle(opt_in);
      const std::vector<std::string> list =
          passes.empty() ? default_pass_names() : split_list(passes);
      OptimizeOptions options;
      options.labels = &in.labels;
      const OptimizeResult result = optimize(in.graph, list, options);
      save_bundle(result.graph, in.labels, opt_out);
      const std::string text = format_reports(result.reports);
      if (!report_path.empty()) {
        write_file(report_path,
                   std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
      }
      out << text;
      if (text.empty() || text.back() != '\n') out << "\n";
    } else if (*c_cls) {
      const Classifier classifier = Classifier::load(
          model, catalog.empty() ? std::nullopt : std::optional<fs::path>(catalog),
          labels.empty() ? std::nullopt : std::optional<fs::path>(labels));
      const std::vector<uint8_t> bytes = read_file(image);
      const Prediction p = classifier.classify(bytes, top);
      out << json::parse(prediction_to_json(p)).dump(2) << "\n";
    } else if (*c_inspect) {
      out << inspect_bundle_json(inspect_model) << "\n";
    } else if (*c_serve) {
      auto [host, port] = parse_listen_address(listen);
      service.host = host;
      service.port = port;
      if (!static_dir.empty()) service.static_dir = static_dir;
      auto classifier = std::make_shared<const Classifier>(Classifier::load(
          serve_model, fs::path(serve_catalog),
          serve_labels.empty() ? std::nullopt : std::optional<fs::path>(serve_labels)));
      RecognizerService server(classifier, service);
      const int bound = server.start();
      out << "listening on " << service.host << ":" << bound << "\n" << std::flush;
      g_stop = false;
      auto previous_int = std::signal(SIGINT, on_signal);
      auto previous_term = std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::signal(SIGINT, previous_int);
      std::signal(SIGTERM, previous_term);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace canopy
