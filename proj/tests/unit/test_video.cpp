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

#include <filesystem>

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>

#include "ugen/error.hpp"
#include "ugen/render.hpp"
#include "ugen/video.hpp"

namespace ugen {
namespace {

cv::Mat screen(int w = 360, int h = 640) {
  cv::Mat img(h, w, CV_8UC3, cv::Scalar(250, 250, 250));
  render::fill_rect(img, {0, 0, w, 56}, render::rgb(33, 90, 160));
  render::draw_text(img, {16, 18}, "HOME", 3, render::rgb(255, 255, 255));
  render::stroke_rect(img, {40, 200, 280, 48}, render::rgb(90, 90, 90), 2);
  render::draw_text(img, {60, 217}, "SIGN IN", 2, render::rgb(30, 30, 30));
  render::draw_icon(img, {300, 14, 28, 28}, render::IconShape::Bars, render::rgb(255, 255, 255));
  return img;
}

Frame frame_of(cv::Mat img, int index = 0) { return {index, std::move(img), 0.0}; }

TEST(Touch, DetectsIndicatorAtEveryOpacity) {
  TouchDetectConfig cfg;
  for (double a : {1.0, 0.8, 0.6, 0.4}) {
    cv::Mat img = screen();
    render::draw_indicator(img, {180, 400}, a, cfg.style);
    auto t = detect_touch(frame_of(img), cfg);
    ASSERT_TRUE(t.has_value()) << a;
    EXPECT_EQ(t->center, (Point{180, 400}));
    EXPECT_NEAR(t->opacity_estimate, a, 0.08);
    EXPECT_GE(t->match_score, 0.8);
  }
}

TEST(Touch, DetectsIndicatorOverWidget) {
  TouchDetectConfig cfg;
  cv::Mat img = screen();
  render::draw_indicator(img, {150, 224}, 0.9, cfg.style);
  auto t = detect_touch(frame_of(img), cfg);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(t->center.x, 150, 1);
  EXPECT_NEAR(t->center.y, 224, 1);
}

TEST(Touch, DetectsIndicatorNearEdge) {
  TouchDetectConfig cfg;
  cv::Mat img = screen();
  render::draw_indicator(img, {21, 619}, 1.0, cfg.style);
  auto t = detect_touch(frame_of(img), cfg);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(t->center.x, 21, 1);
  EXPECT_NEAR(t->center.y, 619, 1);
}

TEST(Touch, NoIndicatorNoTouch) {
  TouchDetectConfig cfg;
  EXPECT_FALSE(detect_touch(frame_of(screen()), cfg).has_value());
  cv::Mat kb = screen();
  render::draw_keyboard(kb, 0.35, {});
  EXPECT_FALSE(detect_touch(frame_of(kb), cfg).has_value());
  EXPECT_FALSE(detect_touch(frame_of(cv::Mat(640, 360, CV_8UC3, cv::Scalar::all(255))), cfg).has_value());
}

TEST(Touch, GroupsMaximalRuns) {
  std::vector<std::optional<TouchPoint>> t(10);
  for (int i : {2, 3, 4, 7, 9}) t[i] = TouchPoint{i, {i, i}, 1.0, 1.0};
  auto g = group_touch_frames(t);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].event_frame_index, 2);
  EXPECT_EQ(g[0].touches.size(), 3u);
  EXPECT_EQ(g[1].event_frame_index, 7);
  EXPECT_EQ(g[2].event_frame_index, 9);
  EXPECT_TRUE(group_touch_frames({}).empty());
}

TouchFrameGroup line(Point a, Point b, int n) {
  TouchFrameGroup g;
  for (int i = 0; i < n; ++i) {
    double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    g.touches.push_back({i, {static_cast<int>(a.x + f * (b.x - a.x)), static_cast<int>(a.y + f * (b.y - a.y))}, 1, 1});
  }
  return g;
}

TEST(Action, ClassifiesByDisplacementAndDuration) {
  ActionConfig cfg;
  EXPECT_EQ(classify_action(line({100, 100}, {100, 100}, 20), cfg, 30).kind, ActionKind::LongTap);
  EXPECT_EQ(classify_action(line({100, 100}, {100, 100}, 5), cfg, 30).kind, ActionKind::Click);
  EXPECT_EQ(classify_action(line({100, 100}, {100, 100}, 15), cfg, 30).kind, ActionKind::LongTap);
  EXPECT_EQ(classify_action(line({100, 100}, {100, 100}, 14), cfg, 30).kind, ActionKind::Click);
  EXPECT_EQ(classify_action(line({200, 500}, {200, 200}, 10), cfg, 30).kind, ActionKind::SwipeUp);
  EXPECT_EQ(classify_action(line({200, 200}, {200, 500}, 10), cfg, 30).kind, ActionKind::SwipeDown);
  EXPECT_EQ(classify_action(line({300, 300}, {50, 320}, 10), cfg, 30).kind, ActionKind::SwipeLeft);
  EXPECT_EQ(classify_action(line({50, 300}, {300, 280}, 10), cfg, 30).kind, ActionKind::SwipeRight);
  // equal axes resolve horizontally
  EXPECT_EQ(classify_action(line({100, 100}, {200, 200}, 10), cfg, 30).kind, ActionKind::SwipeRight);
  // between the click and swipe limits the duration decides
  EXPECT_EQ(classify_action(line({100, 100}, {140, 100}, 4), cfg, 30).kind, ActionKind::Click);
  EXPECT_EQ(classify_action(line({100, 100}, {140, 100}, 30), cfg, 30).kind, ActionKind::LongTap);
  auto a = classify_action(line({10, 20}, {10, 300}, 7), cfg, 30);
  EXPECT_EQ(a.start, (Point{10, 20}));
  EXPECT_EQ(a.end, (Point{10, 300}));
  EXPECT_EQ(a.duration_frames, 7);
  EXPECT_THROW(classify_action({}, cfg, 30), Error);
}

TEST(Action, NamesRoundTrip) {
  for (auto k : {ActionKind::Click, ActionKind::LongTap, ActionKind::SwipeUp, ActionKind::SwipeDown,
                 ActionKind::SwipeLeft, ActionKind::SwipeRight}) {
    EXPECT_EQ(parse_action_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_action_kind("tap"), Error);
}

TEST(Keyboard, DetectsRenderedKeyboards) {
  KeyboardConfig cfg;
  cv::Mat img = screen();
  EXPECT_FALSE(detect_keyboard(frame_of(img), cfg).keyboard);
  render::draw_keyboard(img, 0.35, {});
  auto d = detect_keyboard(frame_of(img), cfg);
  EXPECT_TRUE(d.keyboard);
  EXPECT_GT(d.confidence, 0.5);
  cv::Mat dark = screen();
  render::draw_keyboard(dark, 0.35, {render::rgb(20, 20, 24), render::rgb(70, 70, 76), render::rgb(250, 250, 250)});
  EXPECT_TRUE(detect_keyboard(frame_of(dark), cfg).keyboard);
}

TEST(Keyboard, KeyboardOutsideRegionIsIgnored) {
  // a keyboard-like panel drawn in the top half only
  cv::Mat img = screen();
  cv::Mat top = img(cv::Rect(0, 0, 360, 320));
  render::draw_keyboard(top, 0.7, {});
  EXPECT_FALSE(detect_keyboard(frame_of(img), {}).keyboard);
}

TEST(Keyboard, FeaturesHaveFixedSchema) {
  auto f = keyboard_features(keyboard_crop(screen(), 0.35));
  EXPECT_EQ(f.schema_id, "keyboard-v1");
  EXPECT_EQ(f.values.size(), 65u);
}

TEST(Keyboard, FilterRemovesOnlyTypingInRegion) {
  cv::Mat kb = screen();
  render::draw_keyboard(kb, 0.35, {});
  std::vector<EventFrame> events(3);
  events[0].frame = frame_of(kb, 0);
  events[0].touch.center = {100, 600};  // on the keyboard
  events[1].frame = frame_of(kb, 1);
  events[1].touch.center = {100, 100};  // above it
  events[2].frame = frame_of(screen(), 2);
  events[2].touch.center = {100, 600};  // no keyboard shown
  auto kept = filter_event_frames(events, {});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].frame.index, 1);
  EXPECT_EQ(kept[1].frame.index, 2);
}

TEST(Frames, RejectsEmptyAndMismatched) {
  EXPECT_THROW(make_frames({}, 30), Error);
  try {
    make_frames({cv::Mat(640, 360, CV_8UC3), cv::Mat(600, 360, CV_8UC3)}, 30);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  auto f = make_frames({cv::Mat(10, 10, CV_8UC3), cv::Mat(10, 10, CV_8UC3)}, 20);
  EXPECT_DOUBLE_EQ(f[1].timestamp_ms, 50.0);
}

TEST(Frames, LoadsDirectoryInNameOrder) {
  auto dir = std::filesystem::temp_directory_path() / "ugen_frames_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  EXPECT_THROW(load_frames(dir, 30), Error);
  for (int i = 0; i < 3; ++i) {
    cv::Mat m(8, 8, CV_8UC3, cv::Scalar::all(i * 10));
    char name[16];
    std::snprintf(name, sizeof name, "%04d.png", i);
    cv::imwrite((dir / name).string(), m);
  }
  auto frames = load_frames(dir, 30);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[2].image.at<cv::Vec3b>(0, 0)[0], 20);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ExtractsEventsFromSyntheticRecording) {
  std::vector<cv::Mat> images;
  for (int i = 0; i < 40; ++i) {
    cv::Mat img = screen();
    if (i >= 5 && i < 10) render::draw_indicator(img, {180, 224}, 1.0 - 0.1 * (i - 5), {});
    if (i >= 20 && i < 30) render::draw_indicator(img, {180, 560 - 30 * (i - 20)}, 1.0, {});
    images.push_back(img);
  }
  auto frames = make_frames(images, 30);
  auto events = extract_event_frames(frames, 30, {});
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].frame.index, 5);
  EXPECT_EQ(events[0].action.kind, ActionKind::Click);
  EXPECT_EQ(events[1].frame.index, 20);
  EXPECT_EQ(events[1].action.kind, ActionKind::SwipeUp);
}

}  // namespace
}  // namespace ugen
