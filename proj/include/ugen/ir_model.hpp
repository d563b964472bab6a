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

// App-independent usage models: finite state machines over canonical screens
// with canonical-widget transitions, plus a file-backed model database.

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ugen/action.hpp"
#include "ugen/taxonomy.hpp"

namespace ugen {

struct CanonicalState {
  std::string name;
  bool is_start = false;
  bool is_end = false;

  friend bool operator==(const CanonicalState&, const CanonicalState&) = default;
};

struct Transition {
  std::string from;
  std::optional<std::string> widget;  ///< absent iff the action is a swipe
  ActionKind action = ActionKind::Click;
  std::string to;

  friend auto operator<=>(const Transition&, const Transition&) = default;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// "from widget|- action to".
std::string to_string(const Transition& t);

struct Provenance {
  std::string app_id;
  std::string recording_id;

  friend auto operator<=>(const Provenance&, const Provenance&) = default;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TraceStep {
  std::string screen;
  std::optional<std::string> widget;
  ActionKind action = ActionKind::Click;
};

struct LabeledTrace {
  std::string usage_id;
  std::vector<TraceStep> steps;
  std::string final_screen;
  Provenance source;
};

class IrModel {
 public:
  IrModel() = default;
  IrModel(std::string usage_id, std::string taxonomy_version, std::vector<CanonicalState> states,
          std::set<Transition> transitions, std::vector<Provenance> provenance);

  const std::string& usage_id() const { return usage_id_; }
  const std::string& taxonomy_version() const { return taxonomy_version_; }
  /// Ordered by first appearance.
  const std::vector<CanonicalState>& states() const { return states_; }
  const std::set<Transition>& transitions() const { return transitions_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }

  bool has_state(std::string_view name) const;
  /// Throws Error(UnknownState).
  const CanonicalState& state(std::string_view name) const;
  std::vector<std::string> start_states() const;
  std::vector<std::string> end_states() const;
  bool is_end(std::string_view name) const;

  /// Outgoing transitions ordered by (widget, action, to). Throws
  /// Error(UnknownState).
  std::vector<Transition> successors(std::string_view state) const;

  /// Structural checks; throws Error(ModelParseError) naming the violation.
  void validate() const;

  std::string to_text() const;
  /// Parses and validates. Throws Error(ModelParseError).
  static IrModel from_text(const std::string& text);

  friend bool operator==(const IrModel&, const IrModel&) = default;

 private:
  std::string usage_id_;
  std::string taxonomy_version_;
  std::vector<CanonicalState> states_;
  std::set<Transition> transitions_;
  std::vector<Provenance> provenance_;
};

/// JSON form of a trace: usage_id, final_screen, source {app_id,
/// recording_id} and steps [{screen, widget|null, action}].
std::string trace_to_json(const LabeledTrace& trace);
/// Throws Error(InvalidInput).
LabeledTrace trace_from_json(const std::string& json_text);

/// One state per distinct screen (first appearance order), one transition per
/// event. Throws Error(UnknownCategory) for labels outside the taxonomy and
/// Error(InvalidInput) for an empty trace or a widget/swipe mismatch.
IrModel build_model(const LabeledTrace& trace, const CanonicalTaxonomy& taxonomy);

/// Union of states (flags OR'd) and transitions; provenance concatenated.
/// Throws Error(UsageMismatch) on differing usage or taxonomy version.
IrModel merge_models(const std::vector<IrModel>& models);

struct ModelInfo {
  std::string model_id;
  std::string usage_id;
  std::vector<Provenance> provenance;
};

/// Directory layout: models/<usage>/<model_id>.ir, index.tsv, merged/<usage>.ir.
/// Writes hold an exclusive lock on `.lock`; reads hold a shared one.
class ModelDatabase {
 public:
  explicit ModelDatabase(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Returns the new model id.
  std::string store(const IrModel& model);
  /// Throws Error(IoError) for an unknown id, Error(ModelParseError) for a
  /// corrupt file.
  IrModel load(const std::string& model_id) const;
  std::vector<ModelInfo> list(const std::optional<std::string>& usage_id = std::nullopt) const;
  std::vector<std::string> usages() const;
  /// Merge of every stored model of the usage, cached on disk. Throws
  /// Error(NoModelForUsage).
  IrModel merged(const std::string& usage_id) const;

 private:
  std::filesystem::path root_;
};

/// Names usable as path components: [A-Za-z0-9_.-]+, not "." or "..".
bool is_safe_identifier(std::string_view id);

}  // namespace ugen
