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

#include "ugen/workspace.hpp"

#include "ugen/error.hpp"

namespace ugen {

namespace fs = std::filesystem;

namespace {

void check_id(const std::string& id, const char* what) {
  if (!is_safe_identifier(id)) throw Error(ErrorCode::InvalidInput, std::string("bad ") + what + " id '" + id + "'");
}

}  // namespace

Workspace::Workspace(fs::path root, const std::optional<fs::path>& taxonomy_path) : root_(std::move(root)) {
  if (taxonomy_path) taxonomy_ = CanonicalTaxonomy::load(*taxonomy_path);
  else if (fs::exists(root_ / "taxonomy.json")) taxonomy_ = CanonicalTaxonomy::load(root_ / "taxonomy.json");
  else taxonomy_ = default_taxonomy();
}

fs::path Workspace::recording_dir(const std::string& id) const {
  check_id(id, "recording");
  return root_ / "recordings" / id;
}

fs::path Workspace::analysis_dir(const std::string& id) const {
  check_id(id, "recording");
  return root_ / "analysis" / id;
}

fs::path Workspace::trace_path(const std::string& recording_id) const {
  check_id(recording_id, "recording");
  return root_ / "traces" / (recording_id + ".json");
}

fs::path Workspace::classifier_path(const std::string& target) const {
  if (target != "screen" && target != "widget")
    throw Error(ErrorCode::InvalidInput, "classifier target must be screen or widget, got '" + target + "'");
  return root_ / "classifiers" / (target + ".model");
}

fs::path Workspace::app_path(const std::string& app_id) const {
  check_id(app_id, "app");
  return root_ / "apps" / (app_id + ".json");
}

std::shared_ptr<const ClassifierModel> Workspace::classifier(const std::string& target) const {
  const fs::path p = classifier_path(target);
  if (!fs::exists(p)) return nullptr;
  return std::make_shared<const ClassifierModel>(ClassifierModel::load(p));
}

std::shared_ptr<DeviceAdapter> Workspace::make_adapter(const std::string& ref) const {
  const auto colon = ref.find(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::InvalidInput, "adapter reference '" + ref + "' needs a script: or process: prefix");
  const std::string scheme = ref.substr(0, colon), arg = ref.substr(colon + 1);
  if (arg.empty()) throw Error(ErrorCode::InvalidInput, "adapter reference '" + ref + "' is empty");
  if (scheme == "script") {
    fs::path p = arg;
    if (!fs::exists(p) && is_safe_identifier(arg)) p = app_path(arg);
    if (!fs::exists(p)) throw Error(ErrorCode::IoError, "no app script '" + arg + "'");
    return std::make_shared<ScriptedAdapter>(AppScript::load(p));
  }
  if (scheme == "process") return std::make_shared<ProcessAdapter>(arg);
  throw Error(ErrorCode::InvalidInput, "unknown adapter scheme '" + scheme + "'");
}

std::shared_ptr<const TextExtraction> make_text_extractor(const std::optional<std::string>& command) {
  if (command && !command->empty()) return std::make_shared<CommandTextExtractor>(*command);
  return std::make_shared<GlyphTextExtractor>();
}

}  // namespace ugen
