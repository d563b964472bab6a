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

// Recording decomposition: frames, touch-indicator detection, touch-frame
// grouping, action classification and typing-frame filtering.

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/action.hpp"
#include "ugen/classifier.hpp"
#include "ugen/geometry.hpp"
#include "ugen/render.hpp"

namespace ugen {

struct Frame {
  int index = 0;
  cv::Mat image;  ///< CV_8UC3
  double timestamp_ms = 0.0;
};

struct TouchPoint {
  int frame_index = 0;
  Point center;
  double opacity_estimate = 0.0;
  double match_score = 0.0;
};

/// Maximal run of consecutive touch frames; the first frame is the event frame.
struct TouchFrameGroup {
  std::vector<TouchPoint> touches;
  int event_frame_index = 0;
};

enum class FilterReason { None, Typing };

struct EventFrame {
  Frame frame;
  TouchPoint touch;
  UserAction action;
  FilterReason filtered = FilterReason::None;
};

/// Loads `NNNN.png` files from `dir` in name order. Throws
/// Error(EmptyRecording) or Error(DimensionMismatch).
std::vector<Frame> load_frames(const std::filesystem::path& dir, double fps);

/// Wraps in-memory images as frames with the same checks as load_frames.
std::vector<Frame> make_frames(std::vector<cv::Mat> images, double fps);

struct TouchDetectConfig {
  render::IndicatorStyle style;
  double min_match_score = 0.8;
};

/// Best normalized cross-correlation of the indicator pattern, taken over the
/// disk only so any opacity and background score alike. Nullopt below the
/// minimum score.
std::optional<TouchPoint> detect_touch(const Frame& frame, const TouchDetectConfig& config);

/// Each maximal run of consecutive touch-bearing frames becomes one group.
std::vector<TouchFrameGroup> group_touch_frames(const std::vector<std::optional<TouchPoint>>& touches);

struct ActionConfig {
  double click_displacement_max = 20.0;
  double long_tap_seconds = 0.5;
  double swipe_displacement_min = 60.0;
};

/// Classifies a nonempty group from its first and last touch centres.
UserAction classify_action(const TouchFrameGroup& group, const ActionConfig& config, double fps);

struct KeyboardDecision {
  bool keyboard = false;
  double confidence = 0.0;
};

struct KeyboardConfig {
  double region_fraction = 0.35;
  /// Categorizer over keyboard_features() with labels "keyboard"/"none";
  /// null selects the built-in model.
  std::shared_ptr<const Categorizer> classifier;
};

/// Features of the keyboard crop: 8x8 edge-density grid plus a horizontal
/// periodicity score (65 values, schema "keyboard-v1").
FeatureVector keyboard_features(const cv::Mat& crop);

/// Bottom region_fraction * H rows of `image`.
cv::Mat keyboard_crop(const cv::Mat& image, double region_fraction);

/// KNN trained on rendered keyboard / non-keyboard crops.
std::shared_ptr<const Categorizer> builtin_keyboard_classifier();

/// Decision on the cropped keyboard region only.
KeyboardDecision detect_keyboard(const Frame& frame, const KeyboardConfig& config);

/// Marks an event Typing iff a keyboard is detected and the touch lies in the
/// keyboard region.
void mark_typing_events(std::vector<EventFrame>& events, const KeyboardConfig& config);

/// Events that survive typing filtering, in order.
std::vector<EventFrame> filter_event_frames(std::vector<EventFrame> events, const KeyboardConfig& config);

struct AnalysisConfig {
  TouchDetectConfig touch;
  ActionConfig action;
  KeyboardConfig keyboard;
};

/// Full decomposition: one EventFrame per touch-frame group, with typing
/// events marked (not removed).
std::vector<EventFrame> extract_event_frames(const std::vector<Frame>& frames, double fps, const AnalysisConfig& config);

}  // namespace ugen
