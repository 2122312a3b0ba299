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

#include "canopy/catalog.h"

#include "canopy/error.h"
#include "canopy/image.h"
#include "json.hpp"

namespace canopy {

size_t utf8_length(std::string_view s) {
  size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

namespace {

void check_entry(const std::string& label, const SpeciesEntry& e) {
  if (label.empty()) throw Error(ErrorCode::kConfig, "catalog has an empty label");
  if (utf8_length(e.description) > kMaxDescriptionChars) {
    throw Error(ErrorCode::kConfig, "catalog description for '" + label + "' exceeds " +
                                        std::to_string(kMaxDescriptionChars) +
                                        " characters");
  }
}

}  // namespace

SpeciesCatalog::SpeciesCatalog(std::map<std::string, SpeciesEntry> entries) {
  for (auto& [label, e] : entries) {
    check_entry(label, e);
    entries_.emplace(label, std::move(e));
  }
}

SpeciesCatalog SpeciesCatalog::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "catalog must be a JSON object");
  std::map<std::string, SpeciesEntry> entries;
  for (const auto& [label, value] : doc.items()) {
    if (!value.is_object()) {
      throw Error(ErrorCode::kConfig, "catalog entry '" + label + "' must be an object");
    }
    SpeciesEntry e;
    for (const char* field : {"display_name", "description"}) {
      if (!value.contains(field) || !value[field].is_string()) {
        throw Error(ErrorCode::kConfig, "catalog entry '" + label + "' needs a string '" +
                                            field + "'");
      }
    }
    e.display_name = value["display_name"].get<std::string>();
    e.description = value["description"].get<std::string>();
    entries.emplace(label, std::move(e));
  }
  return SpeciesCatalog(std::move(entries));
}

SpeciesCatalog SpeciesCatalog::load(const std::filesystem::path& path) {
  std::vector<uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("cannot read catalog: ") + e.what());
  }
  try {
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

SpeciesEntry SpeciesCatalog::lookup(std::string_view label) const {
  if (auto it = entries_.find(label); it != entries_.end()) return it->second;
  return {std::string(label), kFallbackDescription};
}

bool SpeciesCatalog::contains(std::string_view label) const {
  return entries_.find(label) != entries_.end();
}

}  // namespace canopy
