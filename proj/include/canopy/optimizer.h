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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canopy/graph.h"
#include "canopy/labels.h"

namespace canopy {

struct PassReport {
  std::string pass;
  int nodes_before = 0;
  int nodes_after = 0;
  size_t bytes_before = 0;
  size_t bytes_after = 0;
  // Max |forward(after) - forward(before)| over the probe batch.
  double max_output_deviation = 0.0;
};

// Rewrites every conv -> batch_norm pair (where the conv feeds nothing else)
// into one conv with per-output-channel scaled kernel and folded bias.
CompGraph fold_batch_norm(const CompGraph& graph);
// Replaces every node whose inputs are all constants by a constant node
// holding its evaluated value.
CompGraph fold_constants(const CompGraph& graph);
// Drops nodes that do not feed the output.
CompGraph eliminate_dead_nodes(const CompGraph& graph);
// Stores every parameter tensor as per-tensor affine int8. Only bits == 8 is
// supported.
CompGraph quantize_weights(const CompGraph& graph, int bits = 8);

// Per-tensor affine int8 encoding. The value range is widened to include
// zero so the zero point always fits in int8; scale = (max - min) / 255.
// The all-zero tensor uses scale 1 and zero_point 0.
QuantizedTensor quantize_tensor(const Tensor& t);

const std::vector<std::string>& valid_pass_names();
const std::vector<std::string>& default_pass_names();

struct OptimizeOptions {
  int probe_count = 16;
  uint64_t probe_seed = 0x5eed;
  // When set, byte counts are those of the full bundle including labels.
  const LabelList* labels = nullptr;
};

struct OptimizeResult {
  CompGraph graph;
  std::vector<PassReport> reports;
};

OptimizeResult optimize(const CompGraph& graph,
                        std::span<const std::string> passes,
                        const OptimizeOptions& options = {});

// Seeded inputs in [-1, 1] shaped [count, h, w, c] for the graph's input.
Tensor probe_batch(const CompGraph& graph, int count, uint64_t seed);

// Structured-text rendering of pass reports.
std::string format_reports(std::span<const PassReport> reports);

}  // namespace canopy
