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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "canopy/builders.h"
#include "canopy/bundle.h"
#include "canopy/classifier.h"
#include "canopy/cli.h"
#include "canopy/error.h"
#include "canopy/graph.h"
#include "canopy/ops.h"
#include "canopy/optimizer.h"
#include "canopy/retrain.h"
#include "canopy/service.h"
#include "canopy/synthetic.h"

namespace py = pybind11;

namespace canopy {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Tensor& t) {
  py::array_t<double> out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Padding padding_from(const std::string& s) {
  if (s == "same") return Padding::kSame;
  if (s == "valid") return Padding::kValid;
  throw Error(ErrorCode::kInvalidArgument, "padding must be 'same' or 'valid', got '" + s + "'");
}

Extent extent(std::pair<int, int> p) { return {p.first, p.second}; }

// Graph plus the labels it was loaded with, if any.
struct PyModel {
  CompGraph graph;
  std::vector<std::string> labels;
};

py::dict report_to_dict(const PassReport& r) {
  py::dict d;
  d["pass"] = r.pass;
  d["nodes_before"] = r.nodes_before;
  d["nodes_after"] = r.nodes_after;
  d["bytes_before"] = r.bytes_before;
  d["bytes_after"] = r.bytes_after;
  d["max_output_deviation"] = r.max_output_deviation;
  return d;
}

class PyService {
 public:
  PyService(const std::filesystem::path& model, const std::filesystem::path& catalog,
            const std::string& host, int port, size_t max_upload_bytes) {
    ServiceConfig config;
    config.host = host;
    config.port = port;
    config.max_upload_bytes = max_upload_bytes;
    service_ = std::make_unique<RecognizerService>(
        std::make_shared<const Classifier>(Classifier::load(model, catalog)), config);
  }
  int start() {
    py::gil_scoped_release release;
    return service_->start();
  }
  void stop() {
    py::gil_scoped_release release;
    service_->stop();
  }
  int port() const { return service_->port(); }

 private:
  std::unique_ptr<RecognizerService> service_;
};

}  // namespace
}  // namespace canopy

PYBIND11_MODULE(_canopy, m) {
  using namespace canopy;
  m.doc() = "Tree recognizer: inference engine, graph optimizer, retraining and service.";

  static py::exception<Error> error_type(m, "CanopyError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      instance.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  // ---- kernels
  m.def(
      "conv2d",
      [](const Array& x, const Array& kernel, std::optional<Array> bias,
         std::pair<int, int> stride, const std::string& padding) {
        ConvSpec spec{to_tensor(kernel), std::nullopt, extent(stride), padding_from(padding)};
        if (bias) spec.bias = to_tensor(*bias);
        return to_array(conv2d(to_tensor(x), spec));
      },
      py::arg("x"), py::arg("kernel"), py::arg("bias") = py::none(),
      py::arg("stride") = std::pair{1, 1}, py::arg("padding") = "same",
      "NHWC convolution; kernel is [kh, kw, cin, cout].");
  m.def(
      "pool",
      [](const Array& x, const std::string& mode, std::pair<int, int> window,
         std::pair<int, int> stride, const std::string& padding) {
        if (mode != "max" && mode != "avg")
          throw Error(ErrorCode::kInvalidArgument, "mode must be 'max' or 'avg'");
        return to_array(pool(to_tensor(x), mode == "max" ? PoolMode::kMax : PoolMode::kAvg,
                             extent(window), extent(stride), padding_from(padding)));
      },
      py::arg("x"), py::arg("mode"), py::arg("window"), py::arg("stride"),
      py::arg("padding") = "same");
  m.def("global_avg_pool", [](const Array& x) { return to_array(global_avg_pool(to_tensor(x))); });
  m.def("relu", [](const Array& x) { return to_array(relu(to_tensor(x))); });
  m.def("fully_connected", [](const Array& x, const Array& W, const Array& b) {
    return to_array(fully_connected(to_tensor(x), to_tensor(W), to_tensor(b)));
  });
  m.def("softmax", [](const Array& logits) { return to_array(softmax(to_tensor(logits))); });
  m.def(
      "head_gradients",
      [](const Array& x, const Array& W, const Array& b, const std::vector<int>& labels) {
        const HeadGradients g = head_gradients(to_tensor(x), to_tensor(W), to_tensor(b), labels);
        return py::make_tuple(to_array(g.dW), to_array(g.db), g.loss);
      },
      py::arg("features"), py::arg("W"), py::arg("b"), py::arg("labels"),
      "Returns (dW, db, loss) of mean softmax cross-entropy.");
  m.def(
      "quantize",
      [](const Array& x) {
        const QuantizedTensor q = quantize_tensor(to_tensor(x));
        py::array_t<int8_t> values(
            std::vector<py::ssize_t>(q.descriptor.shape.begin(), q.descriptor.shape.end()));
        std::copy(q.values.begin(), q.values.end(), values.mutable_data());
        return py::make_tuple(values, q.descriptor.scale, q.descriptor.zero_point);
      },
      "Per-tensor affine int8: returns (values, scale, zero_point).");

  // ---- models
  py::class_<PyModel>(m, "Model")
      .def_property_readonly("labels", [](const PyModel& p) { return p.labels; })
      .def_property_readonly("num_classes", [](const PyModel& p) { return p.graph.num_classes(); })
      .def_property_readonly("input_shape", [](const PyModel& p) { return p.graph.input_shape(); })
      .def_property_readonly("parameter_count",
                             [](const PyModel& p) { return p.graph.parameter_count(); })
      .def_property_readonly("quantized", [](const PyModel& p) { return p.graph.is_quantized(); })
      .def_property_readonly("node_count", [](const PyModel& p) { return p.graph.size(); })
      .def_property_readonly("metadata", [](const PyModel& p) { return p.graph.metadata(); })
      .def_property_readonly("fingerprint",
                             [](const PyModel& p) { return graph_fingerprint(p.graph); })
      .def("forward",
           [](const PyModel& p, const Array& x) {
             Tensor t;
             {
               Tensor in = to_tensor(x);
               py::gil_scoped_release release;
               t = forward(p.graph, in);
             }
             return to_array(t);
           })
      .def("bottleneck",
           [](const PyModel& p, const Array& x) {
             return to_array(bottleneck(p.graph, to_tensor(x)));
           })
      .def(
          "to_bytes",
          [](const PyModel& p, std::optional<std::vector<std::string>> labels) {
            const auto bytes =
                serialize_bundle(p.graph, LabelList(labels ? *labels : p.labels));
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
          },
          py::arg("labels") = py::none())
      .def(
          "save",
          [](const PyModel& p, const std::filesystem::path& path,
             std::optional<std::vector<std::string>> labels) {
            save_bundle(p.graph, LabelList(labels ? *labels : p.labels), path);
          },
          py::arg("path"), py::arg("labels") = py::none());

  m.def(
      "build_mini_inception",
      [](int64_t num_classes, uint64_t seed) {
        return PyModel{build_mini_inception(num_classes, seed), {}};
      },
      py::arg("num_classes"), py::arg("seed") = 42);
  m.def("load_model", [](const std::filesystem::path& path) {
    ModelBundle b = load_bundle(path);
    return PyModel{std::move(b.graph), b.labels.names()};
  });
  m.def(
      "optimize",
      [](const PyModel& model, std::optional<std::vector<std::string>> passes) {
        const std::vector<std::string> names = passes ? *passes : default_pass_names();
        OptimizeResult r = optimize(model.graph, names);
        py::list reports;
        for (const auto& rep : r.reports) reports.append(report_to_dict(rep));
        return py::make_tuple(PyModel{std::move(r.graph), model.labels}, reports);
      },
      py::arg("model"), py::arg("passes") = py::none(),
      "Runs optimizer passes; returns (model, reports).");
  m.def("default_passes", [] { return default_pass_names(); });

  // ---- data and retraining
  m.def("default_tree_classes", [] { return default_tree_classes(); });
  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& root, int per_class, int size, uint64_t seed) {
        SyntheticOptions o;
        o.per_class = per_class;
        o.size = size;
        o.seed = seed;
        return write_synthetic_dataset(root, o);
      },
      py::arg("root"), py::arg("per_class") = 10, py::arg("size") = 64, py::arg("seed") = 2024);
  m.def(
      "_retrain",
      [](const std::filesystem::path& data, const std::filesystem::path& out, double lr,
         int epochs, int batch_size, uint64_t seed, double validation_fraction,
         double test_fraction, const std::string& augment, uint64_t extractor_seed,
         int threads) {
        RetrainOptions o;
        o.train.learning_rate = lr;
        o.train.epochs = epochs;
        o.train.batch_size = batch_size;
        o.train.seed = seed;
        o.train.validation_fraction = validation_fraction;
        o.train.test_fraction = test_fraction;
        o.train.augmentation = augmentation_from_name(augment);
        o.extractor_seed = extractor_seed;
        o.threads = threads;
        std::string report;
        {
          py::gil_scoped_release release;
          const RetrainResult r = run_retrain(data, out, o);
          report = format_training_report(r, o.train);
        }
        return report;
      },
      py::arg("data"), py::arg("out"), py::arg("learning_rate"), py::arg("epochs"),
      py::arg("batch_size"), py::arg("seed"), py::arg("validation_fraction"),
      py::arg("test_fraction"), py::arg("augment"), py::arg("extractor_seed"),
      py::arg("threads"));

  // ---- recognition
  py::class_<Classifier, std::shared_ptr<Classifier>>(m, "_Classifier")
      .def(py::init([](const std::filesystem::path& model,
                       std::optional<std::filesystem::path> catalog,
                       std::optional<std::filesystem::path> labels) {
             return std::make_shared<Classifier>(Classifier::load(model, catalog, labels));
           }),
           py::arg("model"), py::arg("catalog") = py::none(), py::arg("labels") = py::none())
      .def("classify_json",
           [](const Classifier& c, const py::bytes& data, int k) {
             const std::string s = data;
             std::string out;
             {
               py::gil_scoped_release release;
               out = prediction_to_json(c.classify(
                   std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()), k));
             }
             return out;
           })
      .def_property_readonly("labels", [](const Classifier& c) { return c.labels().names(); });

  py::class_<PyService>(m, "_Service")
      .def(py::init<const std::filesystem::path&, const std::filesystem::path&,
                    const std::string&, int, size_t>(),
           py::arg("model"), py::arg("catalog"), py::arg("host") = "127.0.0.1",
           py::arg("port") = 0, py::arg("max_upload_bytes") = kDefaultMaxUploadBytes)
      .def("start", &PyService::start)
      .def("stop", &PyService::stop)
      .def_property_readonly("port", &PyService::port);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "canopy");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line interface in-process; returns (code, stdout, stderr).");
}
