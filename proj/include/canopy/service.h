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
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "canopy/classifier.h"

namespace httplib {
class Server;
}

namespace canopy {

inline constexpr size_t kDefaultMaxUploadBytes = 16u * 1024u * 1024u;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  size_t max_upload_bytes = kDefaultMaxUploadBytes;
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> static_dir;
  int default_k = 3;
};

// "host:port", "[v6]:port" or ":port" (all interfaces). Throws kConfig.
std::pair<std::string, int> parse_listen_address(std::string_view address);

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// {"error": {"code": ..., "message": ...}}
std::string error_body(std::string_view code, std::string_view message);

// HTTP front end over a shared, read-only classifier:
//   POST /api/classify  raw image body or multipart field "image"; ?k=N
//   GET  /api/species   catalog joined with the model's labels
//   GET  /healthz       status and model metadata
class RecognizerService {
 public:
  RecognizerService(std::shared_ptr<const Classifier> classifier, ServiceConfig config);
  ~RecognizerService();
  RecognizerService(const RecognizerService&) = delete;
  RecognizerService& operator=(const RecognizerService&) = delete;

  // Socket-free handlers, also used by the HTTP routes.
  HttpReply classify(std::span<const uint8_t> image, const std::optional<std::string>& k) const;
  HttpReply species() const;
  HttpReply health() const;

  // Binds the listening socket and returns the port. Throws kIo.
  int bind();
  // Serves until stop(). Binds first if needed.
  void run();
  // bind() plus run() on a background thread; returns the port.
  int start();
  void stop();

  int port() const noexcept { return port_; }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  void install_routes();

  std::shared_ptr<const Classifier> classifier_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace canopy
