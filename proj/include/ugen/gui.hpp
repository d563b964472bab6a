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

// Screen segmentation, visual/text grouping, touched-widget selection and
// screen abstraction.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/action.hpp"
#include "ugen/geometry.hpp"
#include "ugen/text.hpp"
#include "ugen/video.hpp"

namespace ugen {

enum class ElementKind { Textual, Visual };

std::string_view to_string(ElementKind kind);

struct GuiElement {
  BoundingBox box;
  ElementKind kind = ElementKind::Visual;
  std::string text;  ///< nonempty for Textual
  cv::Mat crop;      ///< screen pixels under `box`
  /// Set when a Visual element absorbed a text line: the original parts.
  std::optional<BoundingBox> visual_part;
  std::optional<BoundingBox> text_part;
};

enum class ClassType { Button, ImageButton, EditText, TextView, Checkbox, ListItem, Other };
inline constexpr int kClassTypeCount = 7;

std::string_view to_string(ClassType type);
ClassType parse_class_type(std::string_view text);

struct Widget {
  GuiElement element;
  ClassType class_type = ClassType::Other;
  std::optional<std::string> parent_class;
  int zone = 1;  ///< 1..9, row-major over a 3x3 grid
};

struct GuiEvent {
  int frame_index = 0;
  cv::Mat screen;  ///< the screen the widget was segmented from
  std::optional<Widget> widget;
  UserAction action;
};

struct AbstractScreen {
  cv::Mat image;  ///< CV_8UC3; only black, yellow and blue
};

inline const cv::Vec3b kAbstractBlack{0, 0, 0};
inline const cv::Vec3b kAbstractYellow{0, 255, 255};
inline const cv::Vec3b kAbstractBlue{255, 0, 0};

struct SegmentConfig {
  int edge_threshold = 24;    ///< per-channel morphological gradient
  int min_side = 6;           ///< smaller components are noise
  double line_gap_glyphs = 2.0;  ///< max word gap inside a line, in glyph advances
};

/// Visual elements from gradient contours and Textual elements from merged
/// word boxes. Visual contours lying inside a text line are dropped. Output is
/// sorted by (y, x). Extractor failures propagate as Error(TextExtractionError).
std::vector<GuiElement> segment_screen(const cv::Mat& screen, const TextExtraction& extractor,
                                       const SegmentConfig& config = {});

/// Word boxes merged into lines sharing a top edge and height.
std::vector<WordBox> merge_text_lines(std::vector<WordBox> words, double gap_glyphs = 2.0);

/// Each Visual element whose closest element (centre distance) is Textual and
/// vertically collocated absorbs that text: union box, inherited text. Crops
/// are cleared on changed elements; see attach_crops.
std::vector<GuiElement> group_elements(const std::vector<GuiElement>& elements, double line_threshold = 0.5);

/// Fills missing crops from `screen`.
void attach_crops(std::vector<GuiElement>& elements, const cv::Mat& screen);

/// segment_screen, group_elements and attach_crops in one call.
std::vector<GuiElement> extract_elements(const cv::Mat& screen, const TextExtraction& extractor,
                                         const SegmentConfig& config = {}, double line_threshold = 0.5);

/// Index of the touched element. Throws Error(NoTargetWidget) when nothing
/// covers the touch after `max_rounds` expansions.
std::size_t select_touched_index(const std::vector<GuiElement>& elements, Point touch, int expand_step = 10,
                                 int max_rounds = 10);

GuiElement select_touched_widget(const std::vector<GuiElement>& elements, const TouchPoint& touch,
                                 int expand_step = 10, int max_rounds = 10);

/// Black canvas, Visual boxes blue, then Textual boxes yellow.
AbstractScreen abstract_screen(const cv::Mat& screen, const std::vector<GuiElement>& elements);

int zone_of(const BoundingBox& box, int width, int height);

/// Rule-based widget type. A Textual element lying inside a grouped Visual
/// element with the same text takes that element's type.
ClassType infer_class_type(const GuiElement& element, const std::vector<GuiElement>& all,
                           const std::optional<std::string>& parent_class = std::nullopt);

/// Widget for `elements[index]` on a `width` x `height` screen.
Widget make_widget(const std::vector<GuiElement>& elements, std::size_t index, int width, int height,
                   const std::optional<std::string>& parent_class = std::nullopt);

struct SelectConfig {
  int expand_step = 10;
  int max_rounds = 10;
};

/// Swipes yield no widget; other actions select the touched widget.
GuiEvent build_gui_event(const EventFrame& event, const cv::Mat& screen, const std::vector<GuiElement>& elements,
                         const SelectConfig& config = {});

}  // namespace ugen
