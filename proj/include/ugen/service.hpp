// Copyright 2026 The ugen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP facade over the workspace: analysis jobs, labelling sessions, the model
// database and guided generation sessions. JSON in and out, PNG assets.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace ugen {

struct ServiceConfig {
  std::filesystem::path data_root;
  std::optional<std::filesystem::path> taxonomy_path;
  std::optional<std::string> ocr_command;
  std::size_t workers = 2;     ///< background job threads
  std::size_t suggestions = 5;  ///< top-k shown in label sessions
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws Error(IoError).
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  /// Blocks until every queued job has finished.
  void wait_for_jobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ugen
