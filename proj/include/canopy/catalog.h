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
#include <map>
#include <string>
#include <string_view>

namespace canopy {

inline constexpr size_t kMaxDescriptionChars = 2000;
inline constexpr const char* kFallbackDescription =
    "No description is available for this species yet.";

struct SpeciesEntry {
  std::string display_name;
  std::string description;

  friend bool operator==(const SpeciesEntry&, const SpeciesEntry&) = default;
};

// Label -> display name and description. Lookups are total: an unknown label
// gets the label itself as display name and kFallbackDescription.
class SpeciesCatalog {
 public:
  SpeciesCatalog() = default;
  explicit SpeciesCatalog(std::map<std::string, SpeciesEntry> entries);

  // JSON object {"<label>": {"display_name": ..., "description": ...}}.
  // Throws kConfig on malformed input or an over-long description.
  static SpeciesCatalog parse(std::string_view json_text);
  static SpeciesCatalog load(const std::filesystem::path& path);

  SpeciesEntry lookup(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::map<std::string, SpeciesEntry, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, SpeciesEntry, std::less<>> entries_;
};

// Number of Unicode code points in a UTF-8 string; invalid bytes count as one.
size_t utf8_length(std::string_view s);

}  // namespace canopy
