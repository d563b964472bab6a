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

// Recording analysis end to end: event frames, GUI event triples, screen
// abstractions and features, their on-disk form, and top-1 auto labelling.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/classifier.hpp"
#include "ugen/features.hpp"
#include "ugen/gui.hpp"
#include "ugen/ir_model.hpp"
#include "ugen/taxonomy.hpp"
#include "ugen/text.hpp"
#include "ugen/video.hpp"

namespace ugen {

/// `recording.toml` next to the frames. Flat `key = value` lines only:
/// recording_id, app_id, usage_id (strings), fps, width, height (numbers).
struct RecordingManifest {
  std::string recording_id;
  std::string app_id;
  std::string usage_id;
  double fps = 30.0;
  int width = 0;
  int height = 0;

  std::string to_toml() const;
  /// Throws Error(InvalidInput) naming the line.
  static RecordingManifest parse(std::string_view text);
  static RecordingManifest load(const std::filesystem::path& path);
};

struct PipelineConfig {
  AnalysisConfig analysis;
  SegmentConfig segment;
  SelectConfig select;
  double line_threshold = 0.5;
};

struct AnalyzedEvent {
  std::size_t event_index = 0;  ///< into RecordingAnalysis::events
  cv::Mat screen;               ///< segmentation source, free of the indicator
  std::vector<GuiElement> elements;
  GuiEvent gui;
  AbstractScreen abstraction;
  FeatureVector screen_features;
};

struct RecordingAnalysis {
  RecordingManifest manifest;
  std::vector<EventFrame> events;  ///< every touch group, typing marked
  std::vector<AnalyzedEvent> kept;  ///< unfiltered events in order
  cv::Mat final_screen;
  AbstractScreen final_abstraction;
  FeatureVector final_features;
};

/// The frame before the touch group, or the event frame with the indicator
/// painted over when the group starts the recording.
cv::Mat segmentation_screen(const std::vector<Frame>& frames, const EventFrame& event,
                            const render::IndicatorStyle& style);

/// Throws Error(EmptyRecording), Error(NoTargetWidget) or
/// Error(TextExtractionError) from the stages below.
RecordingAnalysis analyze_recording(const std::vector<Frame>& frames, RecordingManifest manifest,
                                    const TextExtraction& extractor, const PipelineConfig& config = {});

/// Loads recording.toml and the frames (from frames/ when present, else the
/// directory itself). A missing manifest takes the directory name as id.
RecordingAnalysis analyze_recording_dir(const std::filesystem::path& dir, const TextExtraction& extractor,
                                        const PipelineConfig& config = {});

std::string events_json(const std::vector<EventFrame>& events);
std::string gui_events_json(const RecordingAnalysis& analysis);

/// events.json, gui_events.json, screens/, crops/ and abstract/ (NNNN = frame
/// index), plus final.png. Throws Error(IoError).
void write_analysis(const RecordingAnalysis& analysis, const std::filesystem::path& out_dir);

/// Top-1 screen for every kept event and the final screen, then top-1
/// widget given that screen. Simulates a developer accepting every first
/// suggestion.
LabeledTrace auto_label(const RecordingAnalysis& analysis, const Categorizer& screen_classifier,
                        const Categorizer& widget_classifier, const CanonicalTaxonomy& taxonomy);

}  // namespace ugen
