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

// HTTP+JSON front end for the annotation service.
//
//   POST /sessions                  {annotator_id, consent}   -> session
//   GET  /sessions/{id}                                        -> session
//   GET  /sessions/{id}/next                                   -> {status, task?}
//   POST /sessions/{id}/judgments   {scenario_id, score}       -> {branch}
//   POST /sessions/{id}/modality    {scenario_id, modality}    -> {status}
//   POST /sessions/{id}/scenarios   {image_id, text}           -> {scenario_id}
//   GET  /export                                               -> JSONL corpus
//   GET  /health                                               -> {status}
//
// Errors: {"code": "VALIDATION" | "PARSE" | "CONFLICT" | "NOT_FOUND", "message",
// "field"?} with HTTP 400 / 400 / 409 / 404.

#pragma once

#include <memory>
#include <string>
#include <thread>

#include "listalign/annotation.h"

namespace httplib {
class Server;
}

namespace listalign {

class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Port 0 binds any free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void run();
  /// bind() then run() on a background thread; returns the bound port or -1.
  int start(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  AnnotationService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace listalign
