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

// Fixture generation (synthetic apps, recordings, ground truth, datasets) and
// the evaluation metrics: similarity to human tests, usage success rate and
// widget recommendation accuracy.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/app_script.hpp"
#include "ugen/classifier.hpp"
#include "ugen/ir_model.hpp"
#include "ugen/render.hpp"
#include "ugen/taxonomy.hpp"
#include "ugen/testgen.hpp"
#include "ugen/text.hpp"

namespace ugen {

// ---------------------------------------------------------------- fixtures

struct RecordingStep {
  std::optional<std::string> widget;  ///< absent for swipes
  ActionKind action = ActionKind::Click;
  std::optional<std::string> text;  ///< typed on the soft keyboard after the tap
};

struct RecordingScript {
  std::string app_id;
  std::string usage_id;
  std::string recording_id;
  std::vector<RecordingStep> steps;
};

struct RenderParams {
  double fps = 30.0;
  render::IndicatorStyle indicator;
  std::vector<double> tap_opacity = {1.0, 0.75, 0.5};  ///< fully solid first
  int idle_min = 3;
  int idle_max = 5;
  int swipe_frames = 8;
  double keyboard_fraction = 0.35;
};

struct FixtureSpec {
  std::vector<AppScript> apps;
  std::vector<RecordingScript> recordings;
  RenderParams render;
  std::uint64_t seed = 1;

  std::string to_json() const;
  /// Throws Error(InvalidInput).
  static FixtureSpec parse(const std::string& json_text);
  static FixtureSpec load(const std::filesystem::path& path);
};

struct GroundTruthEvent {
  int frame_index = 0;  ///< first touch frame
  ActionKind action = ActionKind::Click;
  Point center;  ///< touch centre in the first touch frame
  Point end;
  bool typing = false;
  std::string device_screen;
  std::string screen_label;
  std::string widget_id;  ///< empty for swipes and keystrokes
  std::optional<std::string> widget_label;
  BoundingBox widget_box;
  std::optional<std::string> text;
};

struct GroundTruth {
  std::string app_id;
  std::string usage_id;
  std::string recording_id;
  double fps = 30.0;
  int frame_count = 0;
  std::vector<GroundTruthEvent> events;
  std::string final_device_screen;
  std::string final_screen_label;

  std::size_t retained_count() const;
  /// Canonical trace of the retained events.
  LabeledTrace labeled_trace() const;
  OracleTrace oracle_trace() const;

  std::string to_json() const;
  static GroundTruth parse(const std::string& json_text);
};

struct Recording {
  std::vector<cv::Mat> frames;
  GroundTruth truth;
};

/// Renders the recording of `script` on `app`. Throws Error(FixtureError)
/// when a step names a missing widget, a hidden widget or an undefined move.
Recording synthesize_recording(const AppScript& app, const RecordingScript& script, const RenderParams& params,
                               std::uint64_t seed);

struct FixtureSet {
  std::vector<AppScript> apps;
  std::vector<Recording> recordings;
  std::vector<LabeledExample> screen_examples;
  std::vector<LabeledExample> widget_examples;
};

/// Deterministic under spec.seed. Throws Error(FixtureError).
FixtureSet generate_fixtures(const FixtureSpec& spec, const CanonicalTaxonomy& taxonomy,
                             const TextExtraction& extractor);

/// Writes apps/<app>.json, recordings/<rec>/frames/NNNN.png,
/// recordings/<rec>/{truth.json,recording.toml}, datasets/{screens,widgets}.ds and manifest.txt.
void write_fixtures(const FixtureSet& set, const FixtureSpec& spec, const std::filesystem::path& root);

/// Five shopping apps over eight screen and twelve widget categories with
/// four usages each. With `unmatchable_usage` the last app reaches settings
/// through the account page, a path no other app shows.
FixtureSpec default_fixture_spec(std::uint64_t seed = 7, bool unmatchable_usage = false);

// ---------------------------------------------------------------- metrics

struct UsageSets {
  std::set<std::string> states;
  std::set<Transition> transitions;
};

UsageSets usage_sets(const LabeledTrace& trace);
/// A script without final_screen drops the transition of its last event.
UsageSets usage_sets(const TestScript& script);

struct SimilarityRow {
  std::string usage_id;
  std::string closest_human;
  double precision_states = 0.0;
  double precision_transitions = 0.0;
  double recall_states = 0.0;
  double recall_transitions = 0.0;
  int tests = 1;  ///< weight in the average row
};

/// Closest human = argmax of the mean of the two precisions; ties go to the
/// lower id. Throws Error(InvalidInput) for no humans.
SimilarityRow compute_similarity(const std::string& usage_id, const UsageSets& generated,
                                 const std::vector<std::pair<std::string, UsageSets>>& humans);

/// Humans are identified by recording id. Throws Error(InvalidInput) for no
/// humans or a usage mismatch.
SimilarityRow compute_similarity(const TestScript& generated, const std::vector<LabeledTrace>& humans);

/// Throws Error(InvalidInput) for no results.
double usage_success_rate(const std::vector<bool>& accomplished);

struct RecommendationAccuracy {
  std::size_t hits = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
};

/// Throws Error(EmptyLog) when no steps were logged.
RecommendationAccuracy widget_recommendation_accuracy(const std::vector<std::vector<StepLogRow>>& logs);

/// Test-weighted mean of every metric; nullopt for no rows.
std::optional<SimilarityRow> average_row(const std::vector<SimilarityRow>& rows);

/// CSV with header, one line per row and an average line (header only when
/// empty).
std::string report_csv(const std::vector<SimilarityRow>& rows);
std::string report_table(const std::vector<SimilarityRow>& rows);
/// Throws Error(IoError).
void write_report(const std::vector<SimilarityRow>& rows, const std::filesystem::path& csv_path);

}  // namespace ugen
