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

// Data-root layout shared by the command line and the service.
//
//   <root>/recordings/<rec>/      frames + recording.toml
//   <root>/analysis/<rec>/        events.json, gui_events.json, images
//   <root>/traces/<rec>.json      labelled traces
//   <root>/classifiers/{screen,widget}.model
//   <root>/apps/<app>.json        scripted apps for the script adapter
//   <root>/models/, index.tsv, merged/   model database
//   <root>/runs/<name>/           generation runs

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ugen/app_script.hpp"
#include "ugen/classifier.hpp"
#include "ugen/ir_model.hpp"
#include "ugen/taxonomy.hpp"
#include "ugen/text.hpp"

namespace ugen {

class Workspace {
 public:
  /// Taxonomy from `taxonomy_path`, else <root>/taxonomy.json, else the
  /// built-in one.
  explicit Workspace(std::filesystem::path root, const std::optional<std::filesystem::path>& taxonomy_path = {});

  const std::filesystem::path& root() const { return root_; }
  const CanonicalTaxonomy& taxonomy() const { return taxonomy_; }

  std::filesystem::path recording_dir(const std::string& id) const;
  std::filesystem::path analysis_dir(const std::string& id) const;
  std::filesystem::path trace_path(const std::string& recording_id) const;
  /// `target` is "screen" or "widget"; throws Error(InvalidInput) otherwise.
  std::filesystem::path classifier_path(const std::string& target) const;
  std::filesystem::path app_path(const std::string& app_id) const;
  std::filesystem::path runs_dir() const { return root_ / "runs"; }

  /// Null when the file does not exist.
  std::shared_ptr<const ClassifierModel> classifier(const std::string& target) const;
  ModelDatabase models() const { return ModelDatabase(root_); }

  /// `script:<app-file or app id>` or `process:<command>`. Relative app files
  /// resolve against the working directory, bare ids against apps/. Throws
  /// Error(InvalidInput) or Error(IoError).
  std::shared_ptr<DeviceAdapter> make_adapter(const std::string& ref) const;

 private:
  std::filesystem::path root_;
  CanonicalTaxonomy taxonomy_;
};

/// Runs `command` when given, else the built-in glyph reader.
std::shared_ptr<const TextExtraction> make_text_extractor(const std::optional<std::string>& command);

}  // namespace ugen
