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

#include <iosfwd>
#include <string>
#include <vector>

#include "canopy/graph.h"

namespace canopy {

// Entry point of the `canopy` tool. args[0] is the program name. Returns the
// process exit code: 0 on success, 1 on a runtime failure (one-line cause on
// `err`), 2 on a usage error (usage text on `err`).
//
// Environment overrides, used when the matching flag is absent:
//   CANOPY_DATA, CANOPY_OUT, CANOPY_MODEL, CANOPY_CATALOG, CANOPY_LABELS,
//   CANOPY_LISTEN, CANOPY_MAX_UPLOAD_BYTES, CANOPY_CORS_ORIGIN,
//   CANOPY_STATIC_DIR, CANOPY_CACHE_DIR, CANOPY_THREADS
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// JSON summary used by `canopy inspect`.
std::string inspect_bundle_json(const std::string& bundle_path);

}  // namespace canopy
