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

#include "ugen/gui.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <opencv2/imgproc.hpp>

#include "ugen/error.hpp"

namespace ugen {

std::string_view to_string(ElementKind kind) { return kind == ElementKind::Textual ? "textual" : "visual"; }

std::string_view to_string(ClassType type) {
  switch (type) {
    case ClassType::Button: return "Button";
    case ClassType::ImageButton: return "ImageButton";
    case ClassType::EditText: return "EditText";
    case ClassType::TextView: return "TextView";
    case ClassType::Checkbox: return "Checkbox";
    case ClassType::ListItem: return "ListItem";
    case ClassType::Other: return "Other";
  }
  return "Other";
}

ClassType parse_class_type(std::string_view text) {
  for (int i = 0; i < kClassTypeCount; ++i) {
    auto t = static_cast<ClassType>(i);
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorCode::InvalidInput, "unknown class type '" + std::string(text) + "'");
}

namespace {

bool reading_order(const GuiElement& a, const GuiElement& b) {
  if (a.box.y != b.box.y) return a.box.y < b.box.y;
  if (a.box.x != b.box.x) return a.box.x < b.box.x;
  return a.kind == ElementKind::Textual && b.kind == ElementKind::Visual;
}

cv::Mat crop_of(const cv::Mat& screen, const BoundingBox& box) {
  BoundingBox c = box.clamped(screen.cols, screen.rows);
  return screen(cv::Rect(c.x, c.y, c.w, c.h)).clone();
}

}  // namespace

std::vector<WordBox> merge_text_lines(std::vector<WordBox> words, double gap_glyphs) {
  std::sort(words.begin(), words.end(), [](const WordBox& a, const WordBox& b) {
    return a.box.y != b.box.y ? a.box.y < b.box.y : a.box.x < b.box.x;
  });
  std::vector<WordBox> lines;
  std::vector<bool> used(words.size(), false);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (used[i]) continue;
    WordBox line = words[i];
    used[i] = true;
    const double advance = line.box.h * 6.0 / 7.0;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        if (used[j]) continue;
        const WordBox& w = words[j];
        if (std::abs(w.box.y - line.box.y) > 1 || w.box.h != line.box.h) continue;
        int gap = w.box.x - line.box.right();
        if (gap < 0 || gap > gap_glyphs * advance) continue;
        line.box = line.box.united(w.box);
        line.text += " " + w.text;
        used[j] = true;
        grew = true;
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<GuiElement> segment_screen(const cv::Mat& screen, const TextExtraction& extractor,
                                       const SegmentConfig& config) {
  if (screen.empty()) throw Error(ErrorCode::InvalidInput, "empty screen");
  const int W = screen.cols, H = screen.rows;

  std::vector<GuiElement> out;
  std::vector<BoundingBox> line_boxes;
  for (WordBox& line : merge_text_lines(extractor.extract(screen), config.line_gap_glyphs)) {
    if (line.text.empty()) continue;
    GuiElement e;
    e.box = line.box.clamped(W, H);
    e.kind = ElementKind::Textual;
    e.text = std::move(line.text);
    line_boxes.push_back(e.box);
    out.push_back(std::move(e));
  }

  cv::Mat grad;
  cv::morphologyEx(screen, grad, cv::MORPH_GRADIENT, cv::getStructuringElement(cv::MORPH_RECT, {3, 3}));
  cv::Mat edges;
  if (grad.channels() > 1) {
    std::vector<cv::Mat> ch;
    cv::split(grad, ch);
    edges = ch[0];
    for (std::size_t i = 1; i < ch.size(); ++i) cv::max(edges, ch[i], edges);
  } else {
    edges = grad;
  }
  edges = edges > config.edge_threshold;

  cv::Mat labels, stats, centroids;
  int n = cv::connectedComponentsWithStats(edges, labels, stats, centroids, 8, CV_32S);
  for (int i = 1; i < n; ++i) {
    BoundingBox b{stats.at<int>(i, cv::CC_STAT_LEFT), stats.at<int>(i, cv::CC_STAT_TOP),
                  stats.at<int>(i, cv::CC_STAT_WIDTH), stats.at<int>(i, cv::CC_STAT_HEIGHT)};
    if (b.w < config.min_side || b.h < config.min_side) continue;
    if (b.w >= W - 2 && b.h >= H - 2) continue;
    bool in_text = std::any_of(line_boxes.begin(), line_boxes.end(),
                               [&](const BoundingBox& t) { return t.expanded(2).contains(b); });
    if (in_text) continue;
    GuiElement e;
    e.box = b;
    e.kind = ElementKind::Visual;
    out.push_back(std::move(e));
  }

  std::stable_sort(out.begin(), out.end(), reading_order);
  for (GuiElement& e : out) e.crop = crop_of(screen, e.box);
  return out;
}

std::vector<GuiElement> group_elements(const std::vector<GuiElement>& elements, double line_threshold) {
  std::vector<GuiElement> out = elements;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const GuiElement& v = elements[i];
    if (v.kind != ElementKind::Visual) continue;
    std::size_t best = elements.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < elements.size(); ++j) {
      if (j == i) continue;
      double d = center_distance(v.box, elements[j].box);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == elements.size()) continue;
    const GuiElement& t = elements[best];
    if (t.kind != ElementKind::Textual) continue;
    int smaller = std::min(v.box.h, t.box.h);
    if (v.box.vertical_overlap(t.box) < line_threshold * smaller) continue;
    GuiElement& g = out[i];
    g.visual_part = v.box;
    g.text_part = t.box;
    g.box = v.box.united(t.box);
    g.text = t.text;
    if (!(g.box == v.box)) g.crop = cv::Mat();
  }
  return out;
}

void attach_crops(std::vector<GuiElement>& elements, const cv::Mat& screen) {
  for (GuiElement& e : elements) {
    if (e.crop.empty()) e.crop = crop_of(screen, e.box);
  }
}

std::vector<GuiElement> extract_elements(const cv::Mat& screen, const TextExtraction& extractor,
                                         const SegmentConfig& config, double line_threshold) {
  auto grouped = group_elements(segment_screen(screen, extractor, config), line_threshold);
  attach_crops(grouped, screen);
  return grouped;
}

std::size_t select_touched_index(const std::vector<GuiElement>& elements, Point touch, int expand_step,
                                 int max_rounds) {
  if (elements.empty()) throw Error(ErrorCode::NoTargetWidget, "no elements on screen");
  std::vector<std::size_t> cands;
  for (int round = 0; round <= max_rounds && cands.empty(); ++round) {
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (elements[i].box.expanded(round * expand_step).covers(touch)) cands.push_back(i);
    }
  }
  if (cands.empty()) {
    throw Error(ErrorCode::NoTargetWidget, "no element near (" + std::to_string(touch.x) + "," +
                                               std::to_string(touch.y) + ") after " + std::to_string(max_rounds) +
                                               " expansions");
  }
  if (cands.size() == 1) return cands.front();

  std::vector<std::size_t> fine;
  for (std::size_t a : cands) {
    bool coarse = false;
    for (std::size_t b : cands) {
      if (a == b) continue;
      const BoundingBox &A = elements[a].box, &B = elements[b].box;
      if (A.contains(B) && !(A == B)) {
        coarse = true;
        break;
      }
    }
    if (!coarse) fine.push_back(a);
  }
  std::size_t best = fine.front();
  double best_d = center_distance(elements[best].box, touch);
  for (std::size_t idx : fine) {
    double d = center_distance(elements[idx].box, touch);
    if (d < best_d) {
      best_d = d;
      best = idx;
    }
  }
  return best;
}

GuiElement select_touched_widget(const std::vector<GuiElement>& elements, const TouchPoint& touch, int expand_step,
                                 int max_rounds) {
  return elements[select_touched_index(elements, touch.center, expand_step, max_rounds)];
}

AbstractScreen abstract_screen(const cv::Mat& screen, const std::vector<GuiElement>& elements) {
  AbstractScreen a;
  a.image = cv::Mat(screen.rows, screen.cols, CV_8UC3, cv::Scalar(0, 0, 0));
  auto paint = [&](ElementKind kind, const cv::Vec3b& color) {
    for (const GuiElement& e : elements) {
      if (e.kind != kind) continue;
      BoundingBox c = e.box.clamped(screen.cols, screen.rows);
      a.image(cv::Rect(c.x, c.y, c.w, c.h)).setTo(cv::Scalar(color[0], color[1], color[2]));
    }
  };
  paint(ElementKind::Visual, kAbstractBlue);
  paint(ElementKind::Textual, kAbstractYellow);
  return a;
}

int zone_of(const BoundingBox& box, int width, int height) {
  int col = std::clamp(static_cast<int>(std::floor(3.0 * box.center_x() / width)), 0, 2);
  int row = std::clamp(static_cast<int>(std::floor(3.0 * box.center_y() / height)), 0, 2);
  return 1 + col + 3 * row;
}

namespace {

ClassType classify_visual(const GuiElement& e) {
  if (e.text.empty()) {
    return (e.box.w <= 64 && e.box.h <= 64) ? ClassType::ImageButton : ClassType::Other;
  }
  if (e.visual_part && e.text_part) {
    const BoundingBox& v = *e.visual_part;
    const BoundingBox& t = *e.text_part;
    if (!v.contains(t) && v.w <= 40 && v.h <= 40 && std::abs(v.w - v.h) <= 3) return ClassType::Checkbox;
    if (v.contains(t) && v.w > 3 * v.h) {
      bool left_aligned = (t.x - v.x) < 0.3 * v.w;
      bool mostly_empty = t.w < 0.6 * v.w;
      if (left_aligned && mostly_empty) return ClassType::EditText;
    }
  }
  return ClassType::Button;
}

}  // namespace

ClassType infer_class_type(const GuiElement& element, const std::vector<GuiElement>& all,
                           const std::optional<std::string>& parent_class) {
  if (parent_class && (*parent_class == "ListView" || *parent_class == "RecyclerView")) return ClassType::ListItem;
  if (element.kind == ElementKind::Visual) return classify_visual(element);
  for (const GuiElement& g : all) {
    if (g.kind == ElementKind::Visual && g.text_part && g.text == element.text && g.box.contains(element.box)) {
      return classify_visual(g);
    }
  }
  return ClassType::TextView;
}

Widget make_widget(const std::vector<GuiElement>& elements, std::size_t index, int width, int height,
                   const std::optional<std::string>& parent_class) {
  Widget w;
  w.element = elements.at(index);
  w.class_type = infer_class_type(w.element, elements, parent_class);
  w.parent_class = parent_class;
  w.zone = zone_of(w.element.box, width, height);
  return w;
}

GuiEvent build_gui_event(const EventFrame& event, const cv::Mat& screen, const std::vector<GuiElement>& elements,
                         const SelectConfig& config) {
  GuiEvent g;
  g.frame_index = event.frame.index;
  g.screen = screen;
  g.action = event.action;
  if (is_swipe(event.action.kind)) return g;
  std::size_t idx = select_touched_index(elements, event.touch.center, config.expand_step, config.max_rounds);
  g.widget = make_widget(elements, idx, screen.cols, screen.rows);
  if (g.widget->element.crop.empty()) g.widget->element.crop = crop_of(screen, g.widget->element.box);
  return g;
}

}  // namespace ugen
