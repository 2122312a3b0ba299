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

// Writes the seeded synthetic tree dataset used by the tests and the
// acceptance run: <out>/<class>/<class>_NN.png.

#include <iostream>

#include "CLI11.hpp"
#include "canopy/error.h"
#include "canopy/synthetic.h"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic tree-image fixture set", "canopy_fixtures"};
  std::string out;
  canopy::SyntheticOptions options;
  app.add_option("--out", out, "Dataset root to create")->required();
  app.add_option("--per-class", options.per_class)->capture_default_str();
  app.add_option("--size", options.size, "Image side in pixels")->capture_default_str();
  app.add_option("--seed", options.seed)->capture_default_str();
  app.add_option("--noise", options.noise, "Pixel noise sigma")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto paths = canopy::write_synthetic_dataset(out, options);
    std::cout << "wrote " << paths.size() << " images under " << out << "\n";
  } catch (const canopy::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
