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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ugen/error.hpp"
#include "ugen/gui.hpp"
#include "ugen/render.hpp"

namespace ugen {
namespace {

GuiElement visual(BoundingBox b) { return {b, ElementKind::Visual, "", {}, {}, {}}; }
GuiElement textual(BoundingBox b, std::string t) { return {b, ElementKind::Textual, std::move(t), {}, {}, {}}; }

cv::Mat blank(int w = 360, int h = 640) { return cv::Mat(h, w, CV_8UC3, cv::Scalar(248, 248, 248)); }

TEST(Segment, LabeledButtonsYieldTextualElements) {
  cv::Mat img = blank();
  render::stroke_rect(img, {40, 200, 280, 48}, render::rgb(90, 90, 90), 2);
  render::draw_text(img, {60, 217}, "SIGN IN", 2, render::rgb(30, 30, 30));
  render::stroke_rect(img, {40, 300, 280, 48}, render::rgb(90, 90, 90), 2);
  render::draw_text(img, {60, 314}, "HELP ME", 3, render::rgb(30, 30, 30));
  GlyphTextExtractor ocr;
  auto els = segment_screen(img, ocr);
  std::vector<const GuiElement*> texts;
  for (const auto& e : els)
    if (e.kind == ElementKind::Textual) texts.push_back(&e);
  ASSERT_EQ(texts.size(), 2u);
  EXPECT_EQ(texts[0]->text, "SIGN IN");
  EXPECT_TRUE(texts[0]->box.contains(render::text_extent({60, 217}, "SIGN IN", 2)));
  EXPECT_EQ(texts[1]->text, "HELP ME");
  EXPECT_TRUE(texts[1]->box.contains(render::text_extent({60, 314}, "HELP ME", 3)));
  int visuals = 0;
  for (const auto& e : els) {
    if (e.kind != ElementKind::Visual) continue;
    ++visuals;
    EXPECT_FALSE(e.crop.empty());
  }
  EXPECT_EQ(visuals, 2);
}

TEST(Segment, SolidBlackScreenIsEmpty) {
  GlyphTextExtractor ocr;
  EXPECT_TRUE(segment_screen(cv::Mat(640, 360, CV_8UC3, cv::Scalar::all(0)), ocr).empty());
}

TEST(Segment, SingleIconIsOneVisual) {
  cv::Mat img = blank();
  render::draw_icon(img, {100, 100, 32, 32}, render::IconShape::Square, render::rgb(40, 40, 40));
  GlyphTextExtractor ocr;
  auto els = segment_screen(img, ocr);
  ASSERT_EQ(els.size(), 1u);
  EXPECT_EQ(els[0].kind, ElementKind::Visual);
  EXPECT_TRUE((BoundingBox{100, 100, 32, 32}).expanded(2).contains(els[0].box));
}

TEST(Segment, EmptyScreenRejected) {
  GlyphTextExtractor ocr;
  EXPECT_THROW(segment_screen(cv::Mat(), ocr), Error);
}

TEST(TextLines, MergeWordsOnSameLine) {
  std::vector<WordBox> w = {{{10, 10, 28, 14}, "SHOW"}, {{52, 10, 64, 14}, "PASSWORD"}, {{250, 10, 28, 14}, "FAR"},
                            {{10, 40, 28, 14}, "NEXT"}};
  auto lines = merge_text_lines(w);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0].text, "SHOW PASSWORD");
  EXPECT_EQ(lines[0].box, (BoundingBox{10, 10, 106, 14}));
  EXPECT_EQ(lines[1].text, "FAR");
  EXPECT_EQ(lines[2].text, "NEXT");
}

TEST(Group, CheckboxAbsorbsLabelOnSameLine) {
  std::vector<GuiElement> els = {visual({20, 490, 20, 20}), textual({50, 498, 150, 14}, "Show password")};
  auto g = group_elements(els);
  EXPECT_EQ(g[0].box, (BoundingBox{20, 490, 180, 22}));
  EXPECT_EQ(g[0].text, "Show password");
  EXPECT_EQ(g[1].box, els[1].box);
  EXPECT_EQ(infer_class_type(g[0], g), ClassType::Checkbox);
  EXPECT_EQ(infer_class_type(g[1], g), ClassType::Checkbox);
}

TEST(Group, ClosestVisualLeavesUnchanged) {
  std::vector<GuiElement> els = {visual({20, 490, 20, 20}), visual({45, 490, 20, 20}),
                                 textual({100, 498, 150, 14}, "Label")};
  auto g = group_elements(els);
  EXPECT_EQ(g[0].box, els[0].box);
  EXPECT_TRUE(g[0].text.empty());
}

TEST(Group, LabelFarBelowNotCollocated) {
  std::vector<GuiElement> els = {visual({20, 490, 20, 20}), textual({20, 690, 150, 14}, "Label")};
  auto g = group_elements(els);
  EXPECT_EQ(g[0].box, els[0].box);
  EXPECT_TRUE(g[0].text.empty());
}

TEST(Group, NeverShrinksNeverMergesText) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> pos(0, 300), size(5, 80);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GuiElement> els;
    int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
      els.push_back(rng() % 2 ? visual(b) : textual(b, "t" + std::to_string(i)));
    }
    auto g = group_elements(els);
    ASSERT_EQ(g.size(), els.size());
    for (std::size_t i = 0; i < els.size(); ++i) {
      EXPECT_TRUE(g[i].box.contains(els[i].box));
      if (els[i].kind == ElementKind::Textual) {
        EXPECT_EQ(g[i].box, els[i].box);
      }
    }
  }
}

// Literal three-case rule over all boxes.
std::optional<std::size_t> oracle_select(const std::vector<BoundingBox>& boxes, Point p, int step, int rounds) {
  for (int r = 0; r <= rounds; ++r) {
    std::set<std::size_t> hit;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const BoundingBox& b = boxes[i];
      int x0 = b.x - r * step, y0 = b.y - r * step, x1 = b.x + b.w + r * step, y1 = b.y + b.h + r * step;
      if (p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1) hit.insert(i);
    }
    if (hit.empty()) continue;
    if (hit.size() == 1) return *hit.begin();
    std::set<std::size_t> keep = hit;
    for (std::size_t a : hit) {
      for (std::size_t b : hit) {
        const BoundingBox &A = boxes[a], &B = boxes[b];
        bool strictly_contains = A.x <= B.x && A.y <= B.y && A.x + A.w >= B.x + B.w && A.y + A.h >= B.y + B.h &&
                                 !(A.x == B.x && A.y == B.y && A.w == B.w && A.h == B.h);
        if (a != b && strictly_contains) keep.erase(a);
      }
    }
    std::optional<std::size_t> best;
    double bd = 1e18;
    for (std::size_t i : keep) {
      double cx = boxes[i].x + boxes[i].w / 2.0, cy = boxes[i].y + boxes[i].h / 2.0;
      double d = (cx - p.x) * (cx - p.x) + (cy - p.y) * (cy - p.y);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }
  return std::nullopt;
}

TEST(Select, MatchesBruteForceOracle) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> pos(0, 340), len(4, 160), count(1, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<BoundingBox> boxes;
    std::vector<GuiElement> els;
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      BoundingBox b;
      if (i > 0 && rng() % 4 == 0) {
        // nested or duplicated box
        const BoundingBox& o = boxes[rng() % boxes.size()];
        int shrink = static_cast<int>(rng() % 6);
        b = {o.x + shrink, o.y + shrink, std::max(1, o.w - 2 * shrink), std::max(1, o.h - 2 * shrink)};
      } else {
        b = {pos(rng), pos(rng), len(rng), len(rng)};
      }
      boxes.push_back(b);
      els.push_back(visual(b));
    }
    Point p{pos(rng), pos(rng) + 100};
    auto want = oracle_select(boxes, p, 10, 10);
    if (!want) {
      EXPECT_THROW(select_touched_index(els, p), Error);
    } else {
      EXPECT_EQ(select_touched_index(els, p), *want) << "trial " << trial;
    }
  }
}

TEST(Select, ThreeCases) {
  std::vector<GuiElement> one = {visual({100, 100, 50, 30})};
  EXPECT_EQ(select_touched_index(one, {120, 110}), 0u);
  // 8 px right of the box: found after one expansion
  EXPECT_EQ(select_touched_index(one, {157, 110}), 0u);
  std::vector<GuiElement> form = {visual({10, 10, 300, 300}), visual({50, 50, 200, 40})};
  EXPECT_EQ(select_touched_index(form, {60, 60}), 1u);
  try {
    select_touched_index(one, {600, 600});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoTargetWidget);
  }
}

TEST(Abstract, ColorsAndDrawOrder) {
  cv::Mat img = blank();
  auto a = abstract_screen(img, {visual({10, 10, 50, 50}), textual({40, 40, 100, 20}, "X")});
  ASSERT_EQ(a.image.size(), img.size());
  EXPECT_EQ(a.image.at<cv::Vec3b>(15, 15), kAbstractBlue);
  EXPECT_EQ(a.image.at<cv::Vec3b>(45, 45), kAbstractYellow);
  EXPECT_EQ(a.image.at<cv::Vec3b>(300, 300), kAbstractBlack);
  std::set<std::tuple<int, int, int>> colors;
  for (int y = 0; y < a.image.rows; ++y)
    for (int x = 0; x < a.image.cols; ++x) {
      auto c = a.image.at<cv::Vec3b>(y, x);
      colors.insert({c[0], c[1], c[2]});
    }
  EXPECT_LE(colors.size(), 3u);
  auto empty = abstract_screen(img, {});
  EXPECT_EQ(cv::countNonZero(empty.image.reshape(1)), 0);
  std::vector<GuiElement> els = {visual({10, 10, 50, 50}), textual({40, 40, 100, 20}, "X")};
  auto again = abstract_screen(a.image, els);
  EXPECT_EQ(cv::norm(a.image, again.image, cv::NORM_INF), 0);
}

TEST(Zone, GridFormula) {
  EXPECT_EQ(zone_of({0, 0, 10, 10}, 360, 640), 1);
  EXPECT_EQ(zone_of({350, 0, 10, 10}, 360, 640), 3);
  EXPECT_EQ(zone_of({170, 310, 20, 20}, 360, 640), 5);
  EXPECT_EQ(zone_of({0, 630, 10, 10}, 360, 640), 7);
  EXPECT_EQ(zone_of({350, 630, 10, 10}, 360, 640), 9);
  EXPECT_EQ(zone_of({110, 0, 20, 10}, 360, 640), 2);  // centre x 120 is the boundary
}

TEST(ClassType, Heuristics) {
  std::vector<GuiElement> els = {visual({20, 100, 300, 44}), textual({30, 115, 96, 14}, "USERNAME"),
                                 visual({20, 200, 300, 44}), textual({130, 215, 100, 14}, "SIGN IN"),
                                 visual({300, 10, 32, 32}),  textual({20, 300, 200, 14}, "HELLO")};
  auto g = group_elements(els);
  EXPECT_EQ(infer_class_type(g[0], g), ClassType::EditText);
  EXPECT_EQ(infer_class_type(g[1], g), ClassType::EditText);
  EXPECT_EQ(infer_class_type(g[2], g), ClassType::Button);
  EXPECT_EQ(infer_class_type(g[4], g), ClassType::ImageButton);
  EXPECT_EQ(infer_class_type(g[5], g), ClassType::TextView);
  EXPECT_EQ(infer_class_type(g[5], g, std::string("ListView")), ClassType::ListItem);
  EXPECT_EQ(infer_class_type(visual({0, 0, 300, 300}), g), ClassType::Other);
  for (int i = 0; i < kClassTypeCount; ++i) {
    auto t = static_cast<ClassType>(i);
    EXPECT_EQ(parse_class_type(to_string(t)), t);
  }
}

TEST(GuiEventBuild, SwipeHasNoWidgetClickHasOne) {
  cv::Mat img = blank();
  std::vector<GuiElement> els = {visual({300, 10, 32, 32})};
  attach_crops(els, img);
  EventFrame ev;
  ev.frame = {84, img, 0};
  ev.touch.center = {316, 26};
  ev.action.kind = ActionKind::Click;
  auto g = build_gui_event(ev, img, els);
  ASSERT_TRUE(g.widget.has_value());
  EXPECT_EQ(g.widget->zone, 3);
  EXPECT_EQ(g.frame_index, 84);
  EXPECT_FALSE(g.widget->element.crop.empty());
  ev.action.kind = ActionKind::SwipeUp;
  EXPECT_FALSE(build_gui_event(ev, img, els).widget.has_value());
  ev.action.kind = ActionKind::Click;
  ev.touch.center = {10, 600};
  EXPECT_THROW(build_gui_event(ev, img, els), Error);
}

}  // namespace
}  // namespace ugen
