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

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "canopy/dataset.h"
#include "canopy/image.h"
#include "canopy/ops.h"
#include "canopy/synthetic.h"
#include "test_util.h"

namespace canopy {
namespace {

namespace fs = std::filesystem;
using testing::error_code_of;
using testing::error_message_of;
using testing::TempDir;

RgbImage solid(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
  RgbImage img{w, h, std::vector<uint8_t>(static_cast<size_t>(w) * h * 3)};
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

void put_png(const fs::path& path, uint8_t shade = 100) {
  fs::create_directories(path.parent_path());
  write_file(path, encode_png(solid(8, 8, shade, shade, shade)));
}

void put_text(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  write_file(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

TEST(IndexDataset, TreeFoldersAreSortedIntoClasses) {
  TempDir dir("index");
  for (const char* c : {"cypress", "locust", "pine", "sycamore", "ginkgo", "magnolia"}) {
    put_png(dir / "data" / c / "a.png");
  }
  const DatasetIndex index = index_dataset(dir / "data");
  const std::vector<std::string> expected{"cypress", "ginkgo", "locust",
                                          "magnolia", "pine", "sycamore"};
  EXPECT_EQ(index.classes.names(), expected);
  ASSERT_EQ(index.images.size(), 6u);
  for (size_t i = 0; i < 6; ++i) EXPECT_EQ(index.images[i].label, static_cast<int>(i));
}

TEST(IndexDataset, SingleClassIsRejected) {
  TempDir dir("index");
  put_png(dir / "data" / "pine" / "a.png");
  EXPECT_EQ(error_code_of([&] { index_dataset(dir / "data"); }),
            ErrorCode::kInvalidArgument);
}

TEST(IndexDataset, MissingRootIsRejected) {
  TempDir dir("index");
  EXPECT_EQ(error_code_of([&] { index_dataset(dir / "nope"); }), ErrorCode::kIo);
}

TEST(IndexDataset, EmptyClassErrorNamesTheClass) {
  TempDir dir("index");
  put_png(dir / "data" / "pine" / "a.png");
  put_text(dir / "data" / "ginkgo" / "notes.txt", "not an image");
  const std::string msg = error_message_of([&] { index_dataset(dir / "data"); });
  EXPECT_NE(msg.find("ginkgo"), std::string::npos) << msg;
}

TEST(IndexDataset, IgnoresNonImagesAndSortsFiles) {
  TempDir dir("index");
  put_png(dir / "data" / "pine" / "b.PNG");
  put_png(dir / "data" / "pine" / "a.jpeg");
  put_png(dir / "data" / "pine" / "c.JpG");
  put_text(dir / "data" / "pine" / "readme.md", "x");
  put_text(dir / "data" / "pine" / "png", "x");
  put_png(dir / "data" / "ginkgo" / "z.png");
  put_text(dir / "data" / "stray.png", "top-level files are not classes");
  const DatasetIndex index = index_dataset(dir / "data");
  ASSERT_EQ(index.classes.size(), 2u);
  ASSERT_EQ(index.images.size(), 4u);
  EXPECT_EQ(index.images[0].path.filename(), "z.png");
  EXPECT_EQ(index.images[1].path.filename(), "a.jpeg");
  EXPECT_EQ(index.images[2].path.filename(), "b.PNG");
  EXPECT_EQ(index.images[3].path.filename(), "c.JpG");
}

TEST(IndexDataset, RejectsBadFractions) {
  TempDir dir("index");
  put_png(dir / "data" / "a" / "1.png");
  put_png(dir / "data" / "b" / "1.png");
  EXPECT_EQ(error_code_of([&] { index_dataset(dir / "data", 0.5, 0.1); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(error_code_of([&] { index_dataset(dir / "data", 0.1, -0.1); }),
            ErrorCode::kInvalidArgument);
}

TEST(IndexDataset, CountsPerSplit) {
  TempDir dir("index");
  write_synthetic_dataset(dir / "data", {.per_class = 4, .size = 8});
  const DatasetIndex index = index_dataset(dir / "data");
  EXPECT_EQ(index.count(Split::kTrain) + index.count(Split::kValidation) +
                index.count(Split::kTest),
            24u);
  size_t per_class = 0;
  for (int c = 0; c < 6; ++c) per_class += index.count(Split::kTrain, c);
  EXPECT_EQ(per_class, index.count(Split::kTrain));
}

TEST(AssignSplit, SameNameSameBucket) {
  for (int i = 0; i < 200; ++i) {
    const std::string name = "img_" + std::to_string(i) + ".jpg";
    EXPECT_EQ(assign_split(name, 0.1, 0.1), assign_split(name, 0.1, 0.1));
    // Only the base name matters.
    EXPECT_EQ(assign_split(fs::path("x") / name, 0.1, 0.1),
              assign_split(fs::path("y/z") / name, 0.1, 0.1));
  }
}

TEST(AssignSplit, ZeroFractionsPutEverythingInTrain) {
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(assign_split("f" + std::to_string(i) + ".png", 0.0, 0.0), Split::kTrain);
  }
}

TEST(AssignSplit, ProportionsFollowFractions) {
  std::array<int, 3> counts{};
  for (int i = 0; i < 10000; ++i) {
    const Split s = assign_split("photo_" + std::to_string(i) + ".jpg", 0.1, 0.1);
    ++counts[static_cast<size_t>(s)];
  }
  EXPECT_NEAR(counts[0] / 10000.0, 0.8, 0.02);
  EXPECT_NEAR(counts[1] / 10000.0, 0.1, 0.02);
  EXPECT_NEAR(counts[2] / 10000.0, 0.1, 0.02);
}

TEST(AssignSplit, StableUnderDatasetGrowth) {
  TempDir dir("index");
  for (int i = 0; i < 20; ++i) {
    put_png(dir / "data" / "a" / ("a" + std::to_string(i) + ".png"));
    put_png(dir / "data" / "b" / ("b" + std::to_string(i) + ".png"));
  }
  const DatasetIndex before = index_dataset(dir / "data");
  for (int i = 20; i < 40; ++i) put_png(dir / "data" / "a" / ("a" + std::to_string(i) + ".png"));
  fs::remove(dir / "data" / "b" / "b3.png");
  const DatasetIndex after = index_dataset(dir / "data");
  for (const DatasetImage& img : before.images) {
    for (const DatasetImage& other : after.images) {
      if (other.path == img.path) EXPECT_EQ(other.split, img.split) << img.path;
    }
  }
}

TEST(LoadTrainingImage, LargePhotoIsResizedToNetworkInput) {
  TempDir dir("load");
  RgbImage big = solid(3024, 4023, 30, 160, 60);
  big.pixels[0] = 255;
  write_file(dir / "big.jpg", encode_jpeg(big, 80));
  const Tensor t = load_training_image(dir / "big.jpg", 64, 64);
  EXPECT_EQ(t.shape(), (Shape{1, 64, 64, 3}));
  for (double v : t.data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(LoadTrainingImage, NativeSizeIsNotResampled) {
  TempDir dir("load");
  RgbImage img{64, 64, std::vector<uint8_t>(64 * 64 * 3)};
  for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<uint8_t>(i * 37 % 251);
  write_file(dir / "a.png", encode_png(img));
  const Tensor t = load_training_image(dir / "a.png", 64, 64);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    EXPECT_EQ(t[static_cast<int64_t>(i)], img.pixels[i] / 127.5 - 1.0);
  }
}

TEST(LoadTrainingImage, GrayscaleIsReplicated) {
  TempDir dir("load");
  std::vector<uint8_t> gray(16 * 16);
  for (size_t i = 0; i < gray.size(); ++i) gray[i] = static_cast<uint8_t>(i);
  write_file(dir / "g.png", encode_gray_png(16, 16, gray));
  const Tensor t = load_training_image(dir / "g.png", 16, 16);
  for (int64_t y = 0; y < 16; ++y) {
    for (int64_t x = 0; x < 16; ++x) {
      EXPECT_EQ(t.at(0, y, x, 0), t.at(0, y, x, 1));
      EXPECT_EQ(t.at(0, y, x, 0), t.at(0, y, x, 2));
    }
  }
}

TEST(LoadTrainingImage, UndecodableFileNamesThePath) {
  TempDir dir("load");
  put_text(dir / "broken.jpg", "definitely not a jpeg");
  const std::string msg =
      error_message_of([&] { load_training_image(dir / "broken.jpg", 64, 64); });
  EXPECT_NE(msg.find("broken.jpg"), std::string::npos) << msg;
  EXPECT_EQ(error_code_of([&] { load_training_image(dir / "broken.jpg", 64, 64); }),
            ErrorCode::kDecode);
}

TEST(SyntheticDataset, WritesSixTreeClasses) {
  TempDir dir("synth");
  const auto paths = write_synthetic_dataset(dir / "data");
  EXPECT_EQ(paths.size(), 60u);
  const DatasetIndex index = index_dataset(dir / "data");
  EXPECT_EQ(index.classes.names(), default_tree_classes());
  const RgbImage img = read_image(paths.front());
  EXPECT_EQ(img.width, 64);
  EXPECT_EQ(img.height, 64);
}

TEST(SyntheticDataset, SameSeedSameBytes) {
  TempDir a("synth");
  TempDir b("synth");
  const auto pa = write_synthetic_dataset(a.path(), {.per_class = 2, .size = 16});
  const auto pb = write_synthetic_dataset(b.path(), {.per_class = 2, .size = 16});
  ASSERT_EQ(pa.size(), pb.size());
  for (size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(read_file(pa[i]), read_file(pb[i]));
}

TEST(SyntheticDataset, ClassesHaveDistinctDominantHue) {
  TempDir dir("synth");
  const auto paths = write_synthetic_dataset(dir.path(), {.per_class = 1, .size = 32});
  std::vector<std::array<double, 3>> means;
  for (const auto& p : paths) {
    const RgbImage img = read_image(p);
    std::array<double, 3> m{};
    for (size_t i = 0; i < img.pixels.size(); ++i) m[i % 3] += img.pixels[i];
    for (double& v : m) v /= static_cast<double>(img.pixels.size() / 3);
    means.push_back(m);
  }
  for (size_t i = 0; i < means.size(); ++i) {
    for (size_t j = i + 1; j < means.size(); ++j) {
      const double d = std::hypot(means[i][0] - means[j][0], means[i][1] - means[j][1],
                                  means[i][2] - means[j][2]);
      EXPECT_GT(d, 40.0) << i << " vs " << j;
    }
  }
}

}  // namespace
}  // namespace canopy
