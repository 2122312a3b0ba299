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

#include "canopy/service.h"

#include <charconv>

#include "canopy/error.h"
#include "httplib.h"
#include "json.hpp"

namespace canopy {

using nlohmann::json;

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  const size_t colon = address.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kConfig, "listen address '" + std::string(address) +
                                        "' must look like host:port");
  }
  std::string host(address.substr(0, colon));
  const std::string_view port_text = address.substr(colon + 1);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  if (host.empty()) host = "0.0.0.0";
  int port = -1;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    throw Error(ErrorCode::kConfig, "invalid port in listen address '" +
                                        std::string(address) + "'");
  }
  return {host, port};
}

std::string error_body(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDecode:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kOutOfRange:
      return 400;
    case ErrorCode::kUnsupported:
      return 415;
    default:
      return 500;
  }
}

std::string_view status_code_name(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 413: return "payload_too_large";
    case 415: return "unsupported_media_type";
    default: return status >= 500 ? "internal" : "http_error";
  }
}

void reply(httplib::Response& res, const HttpReply& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

RecognizerService::RecognizerService(std::shared_ptr<const Classifier> classifier,
                                     ServiceConfig config)
    : classifier_(std::move(classifier)),
      config_(std::move(config)),
      server_(std::make_unique<httplib::Server>()) {
  if (!classifier_) throw Error(ErrorCode::kConfig, "service needs a classifier");
  if (config_.default_k < 1) throw Error(ErrorCode::kConfig, "default k must be positive");
  if (config_.max_upload_bytes == 0) throw Error(ErrorCode::kConfig, "upload cap must be positive");
  install_routes();
}

RecognizerService::~RecognizerService() { stop(); }

HttpReply RecognizerService::classify(std::span<const uint8_t> image,
                                      const std::optional<std::string>& k_text) const {
  int k = config_.default_k;
  if (k_text) {
    const auto [ptr, ec] = std::from_chars(k_text->data(), k_text->data() + k_text->size(), k);
    if (ec != std::errc() || ptr != k_text->data() + k_text->size() || k < 1) {
      return {400, error_body(error_code_name(ErrorCode::kInvalidArgument),
                              "k must be a positive integer, got '" + *k_text + "'")};
    }
  }
  if (image.empty()) {
    return {400, error_body(error_code_name(ErrorCode::kInvalidArgument), "empty upload")};
  }
  if (image.size() > config_.max_upload_bytes) {
    return {413, error_body("payload_too_large",
                            "upload exceeds " + std::to_string(config_.max_upload_bytes) +
                                " bytes")};
  }
  try {
    return {200, prediction_to_json(classifier_->classify(image, k))};
  } catch (const Error& e) {
    return {status_for(e.code()), error_body(error_code_name(e.code()), e.what())};
  }
}

HttpReply RecognizerService::species() const {
  json list = json::array();
  const LabelList& labels = classifier_->labels();
  const SpeciesCatalog& catalog = classifier_->catalog();
  for (const std::string& label : labels) {
    const SpeciesEntry e = catalog.lookup(label);
    list.push_back({{"label", label},
                    {"display_name", e.display_name},
                    {"description", e.description},
                    {"in_model", true},
                    {"in_catalog", catalog.contains(label)}});
  }
  for (const auto& [label, e] : catalog.entries()) {
    if (labels.index_of(label)) continue;
    list.push_back({{"label", label},
                    {"display_name", e.display_name},
                    {"description", e.description},
                    {"in_model", false},
                    {"in_catalog", true}});
  }
  return {200, json{{"species", list}, {"fallback_description", kFallbackDescription}}.dump()};
}

HttpReply RecognizerService::health() const {
  const CompGraph& g = classifier_->graph();
  const json doc = {{"status", "ok"},
                    {"model",
                     {{"name", classifier_->model_name()},
                      {"version", classifier_->model_version()},
                      {"num_classes", g.num_classes()},
                      {"parameters", g.parameter_count()},
                      {"quantized", g.is_quantized()},
                      {"labels", classifier_->labels().names()}}}};
  return {200, doc.dump()};
}

void RecognizerService::install_routes() {
  httplib::Server& s = *server_;
  // Bodies over the cap are refused by the transport with 413; the error
  // handler below gives them the JSON error body.
  s.set_payload_max_length(config_.max_upload_bytes);
  s.set_tcp_nodelay(true);
  // Plain SO_REUSEADDR: the default also sets SO_REUSEPORT, which would let
  // a second service silently share a port that is already in use.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  // Streaming handler: the body is never parsed as a form, so raw uploads
  // labelled application/x-www-form-urlencoded (curl's default) still work.
  s.Post("/api/classify", [this](const httplib::Request& req, httplib::Response& res,
                                 const httplib::ContentReader& content_reader) {
    std::optional<std::string> k;
    if (req.has_param("k")) k = req.get_param_value("k");
    std::string image;
    bool has_image = false;
    bool ok = false;
    if (req.is_multipart_form_data()) {
      bool in_image = false;
      ok = content_reader(
          [&](const httplib::MultipartFormData& part) {
            in_image = part.name == "image" && !has_image;
            has_image = has_image || in_image;
            return true;
          },
          [&](const char* data, size_t n) {
            if (in_image) image.append(data, n);
            return true;
          });
      if (ok && !has_image) {
        reply(res, {400, error_body(error_code_name(ErrorCode::kInvalidArgument),
                                    "multipart upload needs an 'image' field")});
        return;
      }
    } else {
      ok = content_reader([&](const char* data, size_t n) {
        image.append(data, n);
        return true;
      });
    }
    if (!ok) return;  // status already set by the transport (413 or 400)
    reply(res, classify(std::span(reinterpret_cast<const uint8_t*>(image.data()), image.size()),
                        k));
  });
  s.Get("/api/species", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, species());
  });
  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  s.Options("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string_view code = status_code_name(res.status);
    res.set_content(error_body(code, httplib::status_message(res.status)),
                    "application/json");
  });
  s.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string msg = "unexpected failure";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          msg = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(error_body("internal", msg), "application/json");
      });
  s.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", config_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    if (config_.cors_origin != "*") res.set_header("Vary", "Origin");
  });

  if (config_.static_dir) {
    if (!s.set_mount_point("/", config_.static_dir->string())) {
      throw Error(ErrorCode::kConfig,
                  "static directory " + config_.static_dir->string() + " does not exist");
    }
  }
}

int RecognizerService::bind() {
  if (port_ >= 0) return port_;
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else if (server_->bind_to_port(config_.host, config_.port)) {
    port_ = config_.port;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::kIo, "cannot listen on " + config_.host + ":" +
                                    std::to_string(config_.port));
  }
  return port_;
}

void RecognizerService::run() {
  bind();
  server_->listen_after_bind();
}

int RecognizerService::start() {
  const int port = bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void RecognizerService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace canopy
