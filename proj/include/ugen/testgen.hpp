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

// Usage-guided test generation: a session walks a merged usage model against
// a live device, asking for a screen choice and a widget choice at each step.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ugen/app_script.hpp"
#include "ugen/classifier.hpp"
#include "ugen/error.hpp"
#include "ugen/ir_model.hpp"
#include "ugen/taxonomy.hpp"
#include "ugen/text.hpp"

namespace ugen {

/// Pseudo widget id used when the recommended transition is a swipe.
inline constexpr std::string_view kScreenWidgetId = "@screen";

enum class SessionStatus { AwaitingScreenChoice, AwaitingWidgetChoice, AwaitingTextInput, Completed, Failed };

std::string_view to_string(SessionStatus status);

struct Recommendation {
  std::string widget_id;
  Transition transition;
  int tier = 1;  ///< 1 terms or parent rule, 2 top-1 class, 3 top-k class; swipes 4
  double confidence = 0.0;
  double term_score = 0.0;
};

struct MatchConfig {
  std::size_t rec_threshold = 5;  ///< stop adding tiers once this many candidates exist
  std::size_t top_k = 5;          ///< tier 3 depth
};

/// Device widgets that may realize one of `expected` transitions, ranked by
/// (tier, confidence desc, term score desc, widget id, transition). Swipe
/// transitions are appended as `@screen` entries. The classifier may be null.
std::vector<Recommendation> match_widgets(const DeviceState& state, const std::string& screen_category,
                                          const std::vector<Transition>& expected, const Categorizer* widget_classifier,
                                          const CanonicalTaxonomy& taxonomy, const MatchConfig& config = {});

/// Jaccard similarity of stemmed token sets and their intersection size.
std::pair<double, std::size_t> term_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Screen feature vector for a raw screenshot (segmentation, abstraction, text).
FeatureVector screenshot_features(const cv::Mat& screenshot, const TextExtraction& extractor);

struct ScriptEvent {
  std::string screen;     ///< chosen canonical screen
  std::string widget_id;  ///< empty for swipes
  std::optional<std::string> canonical_widget;
  ActionKind action = ActionKind::Click;
  std::optional<std::string> text;
  BoundingBox box;
  std::string widget_text;
};

struct TestScript {
  std::string usage_id;
  std::string app_id;
  std::vector<ScriptEvent> events;
  std::optional<std::string> final_screen;  ///< set when the session completed

  std::string to_json() const;
  /// Throws Error(InvalidInput).
  static TestScript parse(const std::string& json_text);
};

/// Executes the script from a fresh reset; returns the screen id after each
/// event, preceded by the initial screen id.
std::vector<std::string> replay_script(const TestScript& script, DeviceAdapter& adapter);

struct GenerationConfig {
  std::size_t screen_top_k = 5;
  MatchConfig match;
};

struct SessionDeps {
  std::shared_ptr<DeviceAdapter> adapter;
  std::shared_ptr<const Categorizer> screen_classifier;
  std::shared_ptr<const Categorizer> widget_classifier;  ///< optional
  std::shared_ptr<const TextExtraction> extractor;
  const CanonicalTaxonomy* taxonomy = nullptr;
};

class GenerationSession {
 public:
  /// Resets the device and classifies its first screen.
  GenerationSession(std::string app_id, IrModel model, SessionDeps deps, GenerationConfig config = {});

  SessionStatus status() const { return status_; }
  const IrModel& model() const { return model_; }
  const std::vector<std::pair<std::string, double>>& screen_suggestions() const { return screen_suggestions_; }
  const std::vector<Recommendation>& recommendations() const { return recommendations_; }
  const std::optional<std::string>& current_state() const { return current_state_; }
  const DeviceState& device_state() const { return device_; }
  const TestScript& script() const { return script_; }
  /// Device screen id before each event plus the final one.
  const std::vector<std::string>& visited_screens() const { return visited_; }
  const std::string& failure() const { return failure_; }

  /// Throws Error(InvalidChoice) outside AwaitingScreenChoice and
  /// Error(NoMatchingState) when `category` is not a model state. Choosing a
  /// state without outgoing transitions fails the session with
  /// Error(NoRecommendation) unless it is an end state.
  void choose_screen(const std::string& category);

  /// Throws Error(InvalidChoice) for ids outside the recommendations.
  void choose_widget(const std::string& widget_id);

  /// Throws Error(InvalidChoice) outside AwaitingTextInput.
  void provide_text(const std::string& text);

 private:
  void observe();
  void perform(const Recommendation& rec, std::optional<std::string> text);
  void fail(ErrorCode code, const std::string& message);

  std::string app_id_;
  IrModel model_;
  SessionDeps deps_;
  GenerationConfig config_;
  SessionStatus status_ = SessionStatus::AwaitingScreenChoice;
  DeviceState device_;
  std::vector<std::pair<std::string, double>> screen_suggestions_;
  std::optional<std::string> current_state_;
  std::vector<Recommendation> recommendations_;
  std::optional<Recommendation> pending_;
  TestScript script_;
  std::vector<std::string> visited_;
  std::string failure_;
};

/// One ground-truth step of a usage on a concrete app.
struct OracleStep {
  std::string device_screen;  ///< adapter screen id before the event
  std::string screen;         ///< canonical screen label
  std::string widget_id;      ///< empty for swipes
  ActionKind action = ActionKind::Click;
  std::optional<std::string> text;
};

struct OracleTrace {
  std::string usage_id;
  std::vector<OracleStep> steps;
  std::string final_device_screen;
  std::string final_screen;
};

struct StepLogRow {
  int step = 0;
  std::string expected;
  std::vector<std::string> suggested;  ///< at most five
  bool hit = false;
};

std::string step_log_csv(const std::vector<StepLogRow>& rows);
/// Throws Error(InvalidInput) on a malformed log.
std::vector<StepLogRow> parse_step_log_csv(const std::string& text);

struct OracleResult {
  bool accomplished = false;
  SessionStatus status = SessionStatus::Failed;
  std::string failure;
  TestScript script;
  std::vector<std::string> visited_screens;
  std::vector<StepLogRow> log;
};

/// Drives a session choosing the ground-truth screen and widget whenever they
/// are offered, else the top suggestion. Capped at 3*|steps|+10 choices.
/// Accomplished iff the session completes on the ground-truth final screen.
OracleResult run_oracle_session(const std::string& app_id, const IrModel& model, const OracleTrace& truth,
                                SessionDeps deps, const GenerationConfig& config = {});

}  // namespace ugen
