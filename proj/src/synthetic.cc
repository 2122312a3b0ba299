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

#include "canopy/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "canopy/error.h"
#include "canopy/image.h"
#include "canopy/random.h"

namespace canopy {

namespace fs = std::filesystem;

const std::vector<std::string>& default_tree_classes() {
  static const std::vector<std::string> names{"cypress", "ginkgo", "locust",
                                              "magnolia", "pine", "sycamore"};
  return names;
}

namespace {

// h in degrees, s and v in [0, 1]; result in 0..255.
std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0) h += 360.0;
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(h / 60.0, 2.0) - 1.0));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h / 60.0)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0};
}

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::vector<fs::path> write_synthetic_dataset(const fs::path& root,
                                              const SyntheticOptions& options) {
  if (options.classes.empty() || options.per_class < 1 || options.size < 4) {
    throw Error(ErrorCode::kInvalidArgument, "invalid synthetic dataset options");
  }
  Rng rng(options.seed);
  std::vector<fs::path> written;
  const auto k = static_cast<double>(options.classes.size());
  for (size_t c = 0; c < options.classes.size(); ++c) {
    const fs::path dir = root / options.classes[c];
    fs::create_directories(dir);
    const double hue = 360.0 * static_cast<double>(c) / k;
    for (int i = 0; i < options.per_class; ++i) {
      const int n = options.size;
      const double h = hue + rng.uniform(-8.0, 8.0);
      const double s = rng.uniform(0.7, 1.0);
      const double v = rng.uniform(0.7, 1.0);
      const auto base = hsv_to_rgb(h, s, v);
      const auto dark = hsv_to_rgb(h, s, v * 0.45);
      const double cx = rng.uniform(0.2, 0.8) * n;
      const double cy = rng.uniform(0.2, 0.8) * n;
      const double radius = rng.uniform(0.1, 0.25) * n;

      RgbImage img{n, n, std::vector<uint8_t>(static_cast<size_t>(n) * n * 3)};
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const bool in_blob = std::hypot(x - cx, y - cy) < radius;
          const auto& col = in_blob ? dark : base;
          for (int ch = 0; ch < 3; ++ch) {
            img.pixels[(static_cast<size_t>(y) * n + x) * 3 + ch] =
                to_byte(col[ch] + options.noise * rng.normal());
          }
        }
      }
      char name[32];
      std::snprintf(name, sizeof name, "_%02d.png", i);
      const fs::path path = dir / (options.classes[c] + name);
      write_file(path, encode_png(img));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace canopy
