// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
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

#include "listalign/server.h"

#include <functional>

#include "httplib.h"
#include "listalign/errors.h"

namespace listalign {

namespace {

using json = nlohmann::ordered_json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kNotFound:
      return 404;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                const std::string& field = {}) {
  json body;
  body["code"] = std::string(error_code_name(code));
  body["message"] = message;
  if (!field.empty()) body["field"] = field;
  send_json(res, http_status(code), body);
}

json parse_body(const httplib::Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kParse, "request body is not valid JSON");
  }
  if (!body.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return body;
}

std::string string_field(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw ValidationError(key, std::string("'") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

// Wraps a handler so library errors become JSON error responses.
httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ValidationError& e) {
      send_error(res, e.code(), e.what(), e.field());
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::kState, e.what());
    }
  };
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  // SO_REUSEPORT would let a second server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
  auto& svr = *server_;
  svr.Post("/sessions", guarded([this](const auto& req, auto& res) {
             const json body = parse_body(req);
             const std::string annotator = string_field(body, "annotator_id");
             if (!body.contains("consent") || !body["consent"].is_boolean()) {
               throw ValidationError("consent", "'consent' must be a boolean");
             }
             send_json(res, 201, to_json(service_.create_session(annotator, body["consent"].get<bool>())));
           }));
  svr.Get("/sessions/:id", guarded([this](const auto& req, auto& res) {
            send_json(res, 200, to_json(service_.session(req.path_params.at("id"))));
          }));
  svr.Get("/sessions/:id/next", guarded([this](const auto& req, auto& res) {
            send_json(res, 200, to_json(service_.next_task(req.path_params.at("id"))));
          }));
  svr.Post("/sessions/:id/judgments", guarded([this](const auto& req, auto& res) {
             const json body = parse_body(req);
             const std::string scenario = string_field(body, "scenario_id");
             if (!body.contains("score") || !body["score"].is_number_integer()) {
               throw ValidationError("score", "'score' must be an integer in 1..5");
             }
             const auto score = body["score"].get<long long>();
             if (score < 1 || score > 5) {
               throw ValidationError("score", "'score' must be an integer in 1..5");
             }
             const auto outcome = service_.submit_judgment(req.path_params.at("id"), scenario,
                                                           static_cast<int>(score));
             send_json(res, 200, json{{"branch", std::string(branch_name(outcome.branch))}});
           }));
  svr.Post("/sessions/:id/modality", guarded([this](const auto& req, auto& res) {
             const json body = parse_body(req);
             service_.submit_modality(req.path_params.at("id"), string_field(body, "scenario_id"),
                                      string_field(body, "modality"));
             send_json(res, 200, json{{"status", "OK"}});
           }));
  svr.Post("/sessions/:id/scenarios", guarded([this](const auto& req, auto& res) {
             const json body = parse_body(req);
             const std::string id = service_.submit_scenario(
                 req.path_params.at("id"), string_field(body, "image_id"),
                 string_field(body, "text"));
             send_json(res, 201, json{{"scenario_id", id}});
           }));
  svr.Get("/export", guarded([this](const auto&, auto& res) {
            res.status = 200;
            res.set_content(service_.export_corpus(), "application/x-ndjson");
          }));
  svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json{{"status", "ok"}});
  });
}

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void AnnotationServer::run() { server_->listen_after_bind(); }

int AnnotationServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  if (bound < 0) return -1;
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
  return bound;
}

void AnnotationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace listalign
