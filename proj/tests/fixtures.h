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

#include <filesystem>
#include <memory>

#include "canopy/retrain.h"
#include "canopy/synthetic.h"
#include "test_util.h"

namespace canopy::testing {

// Synthetic tree dataset plus a model retrained on it with default settings,
// built once per test process.
struct RetrainedFixture {
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path model;
  std::filesystem::path labels;
};

inline const RetrainedFixture& retrained_fixture() {
  static std::unique_ptr<TempDir> dir;
  static RetrainedFixture fixture;
  if (!dir) {
    dir = std::make_unique<TempDir>("retrained");
    fixture.data = dir->path() / "data";
    fixture.out = dir->path() / "out";
    write_synthetic_dataset(fixture.data);
    const RetrainResult r = run_retrain(fixture.data, fixture.out, RetrainOptions{});
    fixture.model = r.paths.model;
    fixture.labels = r.paths.labels;
  }
  return fixture;
}

inline std::filesystem::path source_catalog() {
  return std::filesystem::path(CANOPY_SOURCE_DIR) / "assets" / "catalog.json";
}

}  // namespace canopy::testing
