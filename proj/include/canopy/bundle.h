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
#include <span>
#include <vector>

#include "canopy/graph.h"
#include "canopy/labels.h"

namespace canopy {

// Container layout (all integers little-endian):
//   "TRMB" | u32 format_version | u64 manifest_length | manifest | payload
// The manifest is compact JSON describing nodes, attributes, metadata,
// labels, and the byte range of every parameter blob inside the payload.
// Float blobs are float32 (float64 only for folded constants that are not
// float32-representable); quantized blobs are int8 with their scale and zero
// point recorded in the manifest.
inline constexpr char kBundleMagic[4] = {'T', 'R', 'M', 'B'};
inline constexpr uint32_t kBundleFormatVersion = 1;

struct ModelBundle {
  CompGraph graph;
  LabelList labels;
};

struct BundleLayout {
  size_t total_bytes = 0;
  size_t manifest_bytes = 0;
  size_t payload_bytes = 0;
};

std::vector<uint8_t> serialize_bundle(const CompGraph& graph,
                                      const LabelList& labels);
ModelBundle parse_bundle(std::span<const uint8_t> bytes);

void save_bundle(const CompGraph& graph, const LabelList& labels,
                 const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

// Serialized graph without labels; used for sizing and fingerprints.
std::vector<uint8_t> serialize_graph(const CompGraph& graph);

BundleLayout bundle_layout(std::span<const uint8_t> bytes);

// Hash over the serialized graph (topology, attributes, weights, metadata);
// labels do not contribute.
uint64_t graph_fingerprint(const CompGraph& graph);

}  // namespace canopy
