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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace canopy {

// Ordered class names; position is the class index. Entries are unique,
// non-blank, free of line breaks and sorted ascending by byte value.
class LabelList {
 public:
  explicit LabelList(std::vector<std::string> names);

  size_t size() const noexcept { return names_.size(); }
  const std::string& operator[](size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<size_t> index_of(std::string_view name) const;

  auto begin() const { return names_.begin(); }
  auto end() const { return names_.end(); }

  friend bool operator==(const LabelList&, const LabelList&) = default;

 private:
  std::vector<std::string> names_;
};

// One label per line, each terminated by '\n'.
std::string format_labels(const LabelList& labels);
LabelList parse_labels(std::string_view text);

void emit_labels(const LabelList& labels, const std::filesystem::path& path);
LabelList load_labels(const std::filesystem::path& path);

}  // namespace canopy
