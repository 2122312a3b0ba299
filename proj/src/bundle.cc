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

#include "canopy/bundle.h"

#include <bit>
#include <cstring>
#include <string>

#include "canopy/error.h"
#include "canopy/hash.h"
#include "canopy/image.h"
#include "json.hpp"

namespace canopy {
namespace {

using json = nlohmann::json;

constexpr size_t kHeaderBytes = 4 + 4 + 8;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t get_le(std::span<const uint8_t> bytes, size_t offset, int width) {
  uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<uint64_t>(bytes[offset + static_cast<size_t>(i)]) << (8 * i);
  }
  return v;
}

const char* padding_name(Padding p) { return p == Padding::kSame ? "same" : "valid"; }

Padding padding_from(const std::string& s) {
  if (s == "same") return Padding::kSame;
  if (s == "valid") return Padding::kValid;
  throw Error(ErrorCode::kManifestMismatch, "unknown padding '" + s + "'");
}

json attrs_json(const Node& n) {
  json a = json::object();
  switch (n.kind) {
    case OpKind::kInput:
      a["shape"] = n.attrs.input_shape;
      break;
    case OpKind::kConv2D:
      a["stride"] = {n.attrs.stride.h, n.attrs.stride.w};
      a["padding"] = padding_name(n.attrs.padding);
      break;
    case OpKind::kMaxPool:
    case OpKind::kAvgPool:
      a["window"] = {n.attrs.window.h, n.attrs.window.w};
      a["stride"] = {n.attrs.stride.h, n.attrs.stride.w};
      a["padding"] = padding_name(n.attrs.padding);
      break;
    case OpKind::kBatchNorm:
      a["epsilon"] = n.attrs.epsilon;
      break;
    default:
      break;
  }
  return a;
}

NodeAttrs attrs_from(OpKind kind, const json& a) {
  NodeAttrs attrs;
  auto extent = [&](const char* key) {
    const auto v = a.at(key).get<std::vector<int>>();
    if (v.size() != 2) {
      throw Error(ErrorCode::kManifestMismatch,
                  std::string("attribute '") + key + "' needs two values");
    }
    return Extent{v[0], v[1]};
  };
  switch (kind) {
    case OpKind::kInput:
      attrs.input_shape = a.at("shape").get<Shape>();
      break;
    case OpKind::kConv2D:
      attrs.stride = extent("stride");
      attrs.padding = padding_from(a.at("padding").get<std::string>());
      break;
    case OpKind::kMaxPool:
    case OpKind::kAvgPool:
      attrs.window = extent("window");
      attrs.stride = extent("stride");
      attrs.padding = padding_from(a.at("padding").get<std::string>());
      break;
    case OpKind::kBatchNorm:
      attrs.epsilon = a.at("epsilon").get<double>();
      break;
    default:
      break;
  }
  return attrs;
}

// Builds manifest + payload. Labels are omitted when null.
std::vector<uint8_t> encode(const CompGraph& graph, const LabelList* labels) {
  std::vector<uint8_t> payload;
  json nodes = json::array();
  for (const Node& n : graph.nodes()) {
    json params = json::array();
    for (const Param& p : n.params) {
      json entry;
      entry["name"] = p.name;
      entry["shape"] = p.value.shape();
      entry["offset"] = payload.size();
      if (p.quant) {
        entry["dtype"] = "int8";
        entry["scale"] = p.quant->descriptor.scale;
        entry["zero_point"] = p.quant->descriptor.zero_point;
        for (int8_t q : p.quant->values) payload.push_back(static_cast<uint8_t>(q));
        entry["length"] = p.quant->values.size();
      } else if (p.value.is_float_representable()) {
        entry["dtype"] = "float32";
        for (double v : p.value.data()) {
          put_u32(payload, std::bit_cast<uint32_t>(static_cast<float>(v)));
        }
        entry["length"] = p.value.size() * 4;
      } else {
        // Folded constants can carry double-precision values; they are kept
        // exact rather than rounded.
        entry["dtype"] = "float64";
        for (double v : p.value.data()) {
          put_u64(payload, std::bit_cast<uint64_t>(v));
        }
        entry["length"] = p.value.size() * 8;
      }
      params.push_back(std::move(entry));
    }
    nodes.push_back({{"id", n.id},
                     {"kind", op_kind_name(n.kind)},
                     {"name", n.name},
                     {"inputs", n.inputs},
                     {"attrs", attrs_json(n)},
                     {"params", std::move(params)}});
  }
  json manifest{{"format", "canopy-model-bundle"},
                {"metadata", graph.metadata()},
                {"input_id", graph.input_id()},
                {"bottleneck_id", graph.bottleneck_id()},
                {"output_id", graph.output_id()},
                {"nodes", std::move(nodes)},
                {"payload_bytes", payload.size()}};
  if (labels) manifest["labels"] = labels->names();
  const std::string text = manifest.dump();

  std::vector<uint8_t> out;
  out.reserve(kHeaderBytes + text.size() + payload.size());
  out.insert(out.end(), std::begin(kBundleMagic), std::end(kBundleMagic));
  put_u32(out, kBundleFormatVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

struct Sections {
  json manifest;
  std::span<const uint8_t> payload;
  size_t manifest_bytes = 0;
};

Sections split(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kBundleMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "bad magic: not a TRMB model bundle");
  }
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "truncated bundle header");
  }
  const auto version = static_cast<uint32_t>(get_le(bytes, 4, 4));
  if (version != kBundleFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported bundle format version " + std::to_string(version) +
                    " (expected " + std::to_string(kBundleFormatVersion) + ")");
  }
  const uint64_t mlen = get_le(bytes, 8, 8);
  if (mlen > bytes.size() - kHeaderBytes) {
    throw Error(ErrorCode::kTruncated,
                "truncated manifest: header declares " + std::to_string(mlen) +
                    " bytes, " + std::to_string(bytes.size() - kHeaderBytes) +
                    " available");
  }
  Sections s;
  s.manifest_bytes = static_cast<size_t>(mlen);
  const auto text = bytes.subspan(kHeaderBytes, s.manifest_bytes);
  s.manifest = json::parse(text.begin(), text.end(), nullptr, false);
  if (s.manifest.is_discarded() || !s.manifest.is_object()) {
    throw Error(ErrorCode::kManifestMismatch, "manifest is not valid JSON");
  }
  s.payload = bytes.subspan(kHeaderBytes + s.manifest_bytes);
  return s;
}

[[noreturn]] void mismatch(const std::string& msg) {
  throw Error(ErrorCode::kManifestMismatch, "manifest/weight mismatch: " + msg);
}

Param decode_param(const json& e, std::span<const uint8_t> payload,
                   const std::string& node_name) {
  Param p;
  p.name = e.at("name").get<std::string>();
  const Shape shape = e.at("shape").get<Shape>();
  const auto offset = e.at("offset").get<uint64_t>();
  const auto length = e.at("length").get<uint64_t>();
  const std::string dtype = e.at("dtype").get<std::string>();
  const std::string where = "'" + node_name + "/" + p.name + "'";
  if (offset > payload.size() || length > payload.size() - offset) {
    mismatch(where + " blob [" + std::to_string(offset) + ", " +
             std::to_string(offset + length) + ") lies outside the " +
             std::to_string(payload.size()) + "-byte payload");
  }
  int64_t elements = 0;
  try {
    elements = Tensor(shape).size();
  } catch (const Error&) {
    mismatch(where + " has invalid shape " + shape_to_string(shape));
  }
  const auto blob = payload.subspan(static_cast<size_t>(offset),
                                    static_cast<size_t>(length));
  if (dtype == "float32") {
    if (length != static_cast<uint64_t>(elements) * 4) {
      mismatch(where + " float32 blob holds " + std::to_string(length) +
               " bytes for shape " + shape_to_string(shape));
    }
    std::vector<double> data(static_cast<size_t>(elements));
    for (size_t i = 0; i < data.size(); ++i) {
      const auto bits = static_cast<uint32_t>(get_le(blob, i * 4, 4));
      data[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    try {
      p.value = Tensor(shape, std::move(data));
    } catch (const Error& err) {
      mismatch(where + ": " + err.what());
    }
  } else if (dtype == "float64") {
    if (length != static_cast<uint64_t>(elements) * 8) {
      mismatch(where + " float64 blob holds " + std::to_string(length) +
               " bytes for shape " + shape_to_string(shape));
    }
    std::vector<double> data(static_cast<size_t>(elements));
    for (size_t i = 0; i < data.size(); ++i) {
      data[i] = std::bit_cast<double>(get_le(blob, i * 8, 8));
    }
    try {
      p.value = Tensor(shape, std::move(data));
    } catch (const Error& err) {
      mismatch(where + ": " + err.what());
    }
  } else if (dtype == "int8") {
    if (length != static_cast<uint64_t>(elements)) {
      mismatch(where + " int8 blob holds " + std::to_string(length) +
               " bytes for shape " + shape_to_string(shape));
    }
    QuantizedTensor q;
    q.descriptor.scale = e.at("scale").get<double>();
    q.descriptor.zero_point = e.at("zero_point").get<int>();
    q.descriptor.shape = shape;
    if (!(q.descriptor.scale > 0.0) || q.descriptor.zero_point < -128 ||
        q.descriptor.zero_point > 127) {
      mismatch(where + " has an invalid quantization descriptor");
    }
    q.values.reserve(blob.size());
    for (uint8_t b : blob) q.values.push_back(static_cast<int8_t>(b));
    p.value = q.dequantize();
    p.quant = std::move(q);
  } else {
    mismatch(where + " has unknown dtype '" + dtype + "'");
  }
  return p;
}

}  // namespace

std::vector<uint8_t> serialize_bundle(const CompGraph& graph,
                                      const LabelList& labels) {
  return encode(graph, &labels);
}

ModelBundle parse_bundle(std::span<const uint8_t> bytes) {
  Sections s = split(bytes);
  const json& m = s.manifest;
  try {
    const auto declared = m.at("payload_bytes").get<uint64_t>();
    if (s.payload.size() < declared) {
      throw Error(ErrorCode::kTruncated,
                  "truncated blob payload: manifest declares " +
                      std::to_string(declared) + " bytes, " +
                      std::to_string(s.payload.size()) + " present");
    }
    if (s.payload.size() > declared) {
      mismatch(std::to_string(s.payload.size() - declared) +
               " trailing bytes after the declared payload");
    }

    CompGraph g;
    for (const json& jn : m.at("nodes")) {
      Node n;
      n.kind = op_kind_from_name(jn.at("kind").get<std::string>());
      n.name = jn.at("name").get<std::string>();
      n.inputs = jn.at("inputs").get<std::vector<int>>();
      n.attrs = attrs_from(n.kind, jn.at("attrs"));
      for (const json& jp : jn.at("params")) {
        n.params.push_back(decode_param(jp, s.payload, n.name));
      }
      const int expected = jn.at("id").get<int>();
      if (g.add_node(std::move(n)) != expected) {
        mismatch("node ids are not sequential");
      }
    }
    g.set_input(m.at("input_id").get<int>());
    g.set_bottleneck(m.at("bottleneck_id").get<int>());
    g.set_output(m.at("output_id").get<int>());
    g.metadata() = m.at("metadata").get<std::map<std::string, std::string>>();
    g.validate();

    LabelList labels(m.at("labels").get<std::vector<std::string>>());
    if (static_cast<int64_t>(labels.size()) != g.num_classes()) {
      mismatch(std::to_string(labels.size()) + " labels for a " +
               std::to_string(g.num_classes()) + "-class graph");
    }
    return ModelBundle{std::move(g), std::move(labels)};
  } catch (const json::exception& e) {
    mismatch(std::string("malformed manifest: ") + e.what());
  }
}

void save_bundle(const CompGraph& graph, const LabelList& labels,
                 const std::filesystem::path& path) {
  write_file(path, serialize_bundle(graph, labels));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_bundle(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

BundleLayout bundle_layout(std::span<const uint8_t> bytes) {
  const Sections s = split(bytes);
  return {bytes.size(), s.manifest_bytes, s.payload.size()};
}

std::vector<uint8_t> serialize_graph(const CompGraph& graph) {
  return encode(graph, nullptr);
}

uint64_t graph_fingerprint(const CompGraph& graph) {
  return fnv1a64(encode(graph, nullptr));
}

}  // namespace canopy
