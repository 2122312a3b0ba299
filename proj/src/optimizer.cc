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

#include "canopy/optimizer.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "canopy/bundle.h"
#include "canopy/error.h"
#include "canopy/random.h"
#include "json.hpp"

namespace canopy {
namespace {

// Copies a graph node by node into a fresh graph. The callback sees each
// original node with inputs already remapped and returns the new id the
// original maps to (possibly an existing node it aliases), or nullopt to drop
// it together with everything downstream of it.
CompGraph rewrite(const CompGraph& g,
                  const std::function<std::optional<int>(CompGraph&, Node)>& fn) {
  CompGraph out;
  out.metadata() = g.metadata();
  std::vector<int> remap(static_cast<size_t>(g.size()), -1);
  for (const Node& node : g.nodes()) {
    Node copy = node;
    bool orphaned = false;
    for (int& in : copy.inputs) {
      in = remap[static_cast<size_t>(in)];
      orphaned |= in < 0;
    }
    // Consumers of dropped nodes are dropped with them.
    if (orphaned) continue;
    if (const auto id = fn(out, std::move(copy))) {
      remap[static_cast<size_t>(node.id)] = *id;
    }
  }
  auto mapped = [&](int id, const char* what) {
    const int m = remap[static_cast<size_t>(id)];
    if (m < 0) {
      throw Error(ErrorCode::kInvalidGraph,
                  std::string("rewrite dropped the ") + what + " node");
    }
    return m;
  };
  out.set_input(mapped(g.input_id(), "input"));
  out.set_bottleneck(mapped(g.bottleneck_id(), "bottleneck"));
  out.set_output(mapped(g.output_id(), "output"));
  out.validate();
  return out;
}

std::vector<int> consumer_counts(const CompGraph& g) {
  std::vector<int> uses(static_cast<size_t>(g.size()), 0);
  for (const Node& n : g.nodes()) {
    for (int in : n.inputs) ++uses[static_cast<size_t>(in)];
  }
  return uses;
}

}  // namespace

CompGraph fold_batch_norm(const CompGraph& graph) {
  const auto uses = consumer_counts(graph);
  std::vector<bool> foldable_conv(static_cast<size_t>(graph.size()), false);
  std::vector<bool> foldable_bn(static_cast<size_t>(graph.size()), false);
  for (const Node& n : graph.nodes()) {
    if (n.kind != OpKind::kBatchNorm) continue;
    const Node& src = graph.node(n.inputs[0]);
    if (src.kind == OpKind::kConv2D && uses[static_cast<size_t>(src.id)] == 1 &&
        src.id != graph.bottleneck_id()) {
      foldable_conv[static_cast<size_t>(src.id)] = true;
      foldable_bn[static_cast<size_t>(n.id)] = true;
    }
  }

  std::vector<const Node*> pending(static_cast<size_t>(graph.size()), nullptr);
  return rewrite(graph, [&](CompGraph& out, Node node) -> std::optional<int> {
    const auto old = static_cast<size_t>(node.id);
    if (foldable_conv[old]) {
      // Aliased to its own input so the batch norm (its only consumer)
      // receives the conv's source after remapping.
      pending[old] = &graph.node(node.id);
      return node.inputs[0];
    }
    if (!foldable_bn[old]) return out.add_node(std::move(node));

    const Node& conv = *pending[static_cast<size_t>(graph.node(node.id).inputs[0])];
    const Tensor& k = conv.param("kernel");
    const int64_t cout = k.dim(3);
    const Tensor& mean = node.param("mean");
    const Tensor& var = node.param("variance");
    const Tensor& gamma = node.param("gamma");
    const Tensor& beta = node.param("beta");
    const Param* prior = conv.find_param("bias");

    Tensor kernel = k;
    Tensor bias({cout});
    for (int64_t c = 0; c < cout; ++c) {
      const double scale = gamma[c] / std::sqrt(var[c] + node.attrs.epsilon);
      const double b0 = prior ? prior->value[c] : 0.0;
      bias[c] = beta[c] + (b0 - mean[c]) * scale;
      for (int64_t i = c; i < kernel.size(); i += cout) kernel[i] *= scale;
    }
    Node fused;
    fused.kind = OpKind::kConv2D;
    fused.name = conv.name;
    fused.attrs = conv.attrs;
    fused.inputs = {node.inputs[0]};
    fused.params = {{"kernel", kernel.rounded_to_float(), std::nullopt},
                    {"bias", bias.rounded_to_float(), std::nullopt}};
    return out.add_node(std::move(fused));
  });
}

CompGraph fold_constants(const CompGraph& graph) {
  const CompGraph folded = rewrite(graph, [&](CompGraph& out, Node node) -> std::optional<int> {
    const bool all_const =
        !node.inputs.empty() &&
        std::all_of(node.inputs.begin(), node.inputs.end(), [&](int id) {
          return out.node(id).kind == OpKind::kConstant;
        });
    if (!all_const) return out.add_node(std::move(node));
    std::vector<const Tensor*> args;
    for (int id : node.inputs) args.push_back(&out.node(id).param("value"));
    Node constant;
    constant.kind = OpKind::kConstant;
    constant.name = node.name;
    constant.params = {{"value", evaluate_node(node, args), std::nullopt}};
    return out.add_node(std::move(constant));
  });
  // Constants that only fed folded nodes are now unused.
  const auto uses = consumer_counts(folded);
  return rewrite(folded, [&](CompGraph& out, Node node) -> std::optional<int> {
    if (node.kind == OpKind::kConstant && uses[static_cast<size_t>(node.id)] == 0) {
      return std::nullopt;
    }
    return out.add_node(std::move(node));
  });
}

CompGraph eliminate_dead_nodes(const CompGraph& graph) {
  std::vector<bool> live(static_cast<size_t>(graph.size()), false);
  live[static_cast<size_t>(graph.output_id())] = true;
  live[static_cast<size_t>(graph.input_id())] = true;
  for (int i = graph.output_id(); i >= 0; --i) {
    if (!live[static_cast<size_t>(i)]) continue;
    for (int in : graph.node(i).inputs) live[static_cast<size_t>(in)] = true;
  }
  return rewrite(graph, [&](CompGraph& out, Node node) -> std::optional<int> {
    if (!live[static_cast<size_t>(node.id)]) return std::nullopt;
    return out.add_node(std::move(node));
  });
}

QuantizedTensor quantize_tensor(const Tensor& t) {
  const auto [mn, mx] = std::minmax_element(t.data().begin(), t.data().end());
  QuantizedTensor q;
  q.descriptor.shape = t.shape();
  q.values.resize(static_cast<size_t>(t.size()));
  if (*mn == 0.0 && *mx == 0.0) {
    q.descriptor.scale = 1.0;
    q.descriptor.zero_point = 0;
  } else {
    const double lo = std::min(*mn, 0.0);
    const double hi = std::max(*mx, 0.0);
    q.descriptor.scale = (hi - lo) / 255.0;
    q.descriptor.zero_point = static_cast<int>(
        std::clamp(std::round(-128.0 - lo / q.descriptor.scale), -128.0, 127.0));
  }
  for (int64_t i = 0; i < t.size(); ++i) {
    const double code = std::round(t[i] / q.descriptor.scale) +
                        static_cast<double>(q.descriptor.zero_point);
    q.values[static_cast<size_t>(i)] =
        static_cast<int8_t>(std::clamp(code, -128.0, 127.0));
  }
  return q;
}

CompGraph quantize_weights(const CompGraph& graph, int bits) {
  if (bits != 8) {
    throw Error(ErrorCode::kUnsupported,
                "unsupported quantization width " + std::to_string(bits) +
                    " (only 8 is supported)");
  }
  return rewrite(graph, [](CompGraph& out, Node node) -> std::optional<int> {
    for (Param& p : node.params) {
      if (p.quant) continue;
      p.quant = quantize_tensor(p.value);
      p.value = p.quant->dequantize();
    }
    return out.add_node(std::move(node));
  });
}

const std::vector<std::string>& valid_pass_names() {
  static const std::vector<std::string> names{
      "fold_batch_norm", "fold_constants", "eliminate_dead_nodes",
      "quantize_weights"};
  return names;
}

const std::vector<std::string>& default_pass_names() { return valid_pass_names(); }

Tensor probe_batch(const CompGraph& graph, int count, uint64_t seed) {
  const Shape& s = graph.input_shape();
  Tensor probes({count, s[0], s[1], s[2]});
  Rng rng(seed);
  for (double& v : probes.mutable_data()) v = rng.uniform(-1.0, 1.0);
  return probes;
}

OptimizeResult optimize(const CompGraph& graph,
                        std::span<const std::string> passes,
                        const OptimizeOptions& options) {
  using PassFn = CompGraph (*)(const CompGraph&);
  auto lookup = [](const std::string& name) -> PassFn {
    if (name == "fold_batch_norm") return &fold_batch_norm;
    if (name == "fold_constants") return &fold_constants;
    if (name == "eliminate_dead_nodes") return &eliminate_dead_nodes;
    if (name == "quantize_weights") {
      return [](const CompGraph& g) { return quantize_weights(g, 8); };
    }
    std::string valid;
    for (const auto& n : valid_pass_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::kInvalidArgument,
                "unknown pass '" + name + "'; valid passes: " + valid);
  };
  std::vector<PassFn> fns;
  for (const std::string& name : passes) fns.push_back(lookup(name));

  auto size_of = [&](const CompGraph& g) {
    return options.labels ? serialize_bundle(g, *options.labels).size()
                          : serialize_graph(g).size();
  };

  OptimizeResult result{graph, {}};
  if (fns.empty()) return result;
  const Tensor probes = probe_batch(graph, options.probe_count, options.probe_seed);
  Tensor before_out = forward(graph, probes);
  size_t before_bytes = size_of(graph);
  for (size_t i = 0; i < fns.size(); ++i) {
    CompGraph next = fns[i](result.graph);
    Tensor after_out = forward(next, probes);
    PassReport r;
    r.pass = passes[i];
    r.nodes_before = result.graph.size();
    r.nodes_after = next.size();
    r.bytes_before = before_bytes;
    r.bytes_after = size_of(next);
    r.max_output_deviation = max_abs_difference(before_out, after_out);
    result.reports.push_back(r);
    result.graph = std::move(next);
    before_out = std::move(after_out);
    before_bytes = r.bytes_after;
  }
  return result;
}

std::string format_reports(std::span<const PassReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PassReport& r : reports) {
    arr.push_back({{"pass", r.pass},
                   {"nodes_before", r.nodes_before},
                   {"nodes_after", r.nodes_after},
                   {"bytes_before", r.bytes_before},
                   {"bytes_after", r.bytes_after},
                   {"max_output_deviation", r.max_output_deviation}});
  }
  return nlohmann::json{{"passes", arr}}.dump(2);
}

}  // namespace canopy
