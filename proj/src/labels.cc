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

#include "canopy/labels.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "canopy/error.h"

namespace canopy {
namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\v' || c == '\f';
  });
}

}  // namespace

LabelList::LabelList(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "label list is empty");
  }
  for (size_t i = 0; i < names_.size(); ++i) {
    const std::string& n = names_[i];
    if (is_blank(n)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(i) + " is blank");
    }
    if (n.find_first_of("\r\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(i) + " contains a line break");
    }
    if (i > 0 && names_[i - 1] == n) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate label '" + n + "'");
    }
    if (i > 0 && names_[i - 1] > n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "labels are not sorted: '" + names_[i - 1] + "' precedes '" +
                      n + "'");
    }
  }
}

std::optional<size_t> LabelList::index_of(std::string_view name) const {
  const auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<size_t>(it - names_.begin());
}

std::string format_labels(const LabelList& labels) {
  std::string out;
  for (const std::string& n : labels) {
    out += n;
    out += '\n';
  }
  return out;
}

LabelList parse_labels(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "label file is empty");
  if (text.back() != '\n') {
    throw Error(ErrorCode::kInvalidArgument,
                "label file must end with a newline");
  }
  std::vector<std::string> names;
  std::set<std::string_view> seen;
  size_t line = 1;
  size_t pos = 0;
  while (pos < text.size()) {
    const size_t nl = text.find('\n', pos);
    const std::string_view entry = text.substr(pos, nl - pos);
    if (is_blank(entry)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label file line " + std::to_string(line) + " is blank");
    }
    if (!seen.insert(entry).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label file line " + std::to_string(line) +
                      " duplicates '" + std::string(entry) + "'");
    }
    names.emplace_back(entry);
    pos = nl + 1;
    ++line;
  }
  return LabelList(std::move(names));
}

void emit_labels(const LabelList& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << format_labels(labels);
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

LabelList load_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  try {
    return parse_labels(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace canopy
