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

#include "canopy/dataset.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "canopy/error.h"
#include "canopy/hash.h"
#include "canopy/image.h"
#include "canopy/ops.h"

namespace canopy {

namespace fs = std::filesystem;

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split assign_split(const fs::path& path, double validation_fraction,
                   double test_fraction) {
  const std::string name = path.filename().string();
  const uint64_t bucket = fnv1a64(name) % 10000;
  const auto val_cut = static_cast<uint64_t>(std::llround(validation_fraction * 10000));
  const auto test_cut =
      val_cut + static_cast<uint64_t>(std::llround(test_fraction * 10000));
  if (bucket < val_cut) return Split::kValidation;
  if (bucket < test_cut) return Split::kTest;
  return Split::kTrain;
}

size_t DatasetIndex::count(Split split) const {
  return static_cast<size_t>(std::count_if(
      images.begin(), images.end(),
      [&](const DatasetImage& i) { return i.split == split; }));
}

size_t DatasetIndex::count(Split split, int label) const {
  return static_cast<size_t>(std::count_if(
      images.begin(), images.end(), [&](const DatasetImage& i) {
        return i.split == split && i.label == label;
      }));
}

bool has_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

namespace {

void check_fractions(double v, double t) {
  if (!(v >= 0.0 && v < 0.5) || !(t >= 0.0 && t < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument,
                "split fractions must lie in [0, 0.5)");
  }
}

}  // namespace

DatasetIndex index_dataset(const fs::path& root, double validation_fraction,
                           double test_fraction) {
  check_fractions(validation_fraction, test_fraction);
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kIo, "dataset root " + root.string() +
                                    " is not a directory");
  }
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  if (class_dirs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset " + root.string() + " needs at least 2 class folders, found " +
                    std::to_string(class_dirs.size()));
  }
  std::vector<std::string> names;
  for (const auto& d : class_dirs) names.push_back(d.filename().string());

  DatasetIndex index{root, LabelList(names), {}};
  for (size_t c = 0; c < class_dirs.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    if (files.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class '" + names[c] + "' has no images");
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });
    for (auto& f : files) {
      const Split s = assign_split(f, validation_fraction, test_fraction);
      index.images.push_back({std::move(f), static_cast<int>(c), s});
    }
  }
  return index;
}

Tensor load_training_image(const fs::path& path, int64_t target_h,
                           int64_t target_w) {
  return prepare_input(read_image(path), target_h, target_w);
}

}  // namespace canopy
