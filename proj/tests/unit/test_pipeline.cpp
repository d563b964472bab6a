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
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ugen/error.hpp"
#include "ugen/eval.hpp"
#include "ugen/pipeline.hpp"

namespace ugen {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Manifest, RoundTripAndErrors) {
  RecordingManifest m{"rec-1", "aurora", "sign_in", 29.97, 360, 640};
  auto back = RecordingManifest::parse(m.to_toml());
  EXPECT_EQ(back.recording_id, "rec-1");
  EXPECT_EQ(back.usage_id, "sign_in");
  EXPECT_DOUBLE_EQ(back.fps, 29.97);
  EXPECT_EQ(back.height, 640);
  auto c = RecordingManifest::parse("# comment\n\nfps = 24\nextra = \"ignored\"\n");
  EXPECT_EQ(c.fps, 24.0);
  try {
    RecordingManifest::parse("fps = 30\napp_id = aurora\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(RecordingManifest::parse("fps = \"fast\"\n"), Error);
  EXPECT_THROW(RecordingManifest::parse("fps = 0\n"), Error);
  EXPECT_THROW(RecordingManifest::parse("width\n"), Error);
}

struct Synth {
  AppScript app;
  Recording rec;
};

Synth sign_in_recording() {
  FixtureSpec spec = default_fixture_spec(11, false);
  for (const auto& r : spec.recordings)
    if (r.recording_id == "aurora-sign_in")
      return {spec.apps[0], synthesize_recording(spec.apps[0], r, spec.render, spec.seed)};
  throw std::logic_error("missing recording");
}

TEST(Pipeline, SegmentationScreenAvoidsIndicator) {
  auto s = sign_in_recording();
  auto frames = make_frames(s.rec.frames, 30);
  auto events = extract_event_frames(frames, 30, {});
  ASSERT_FALSE(events.empty());
  cv::Mat prev = segmentation_screen(frames, events[0], {});
  EXPECT_EQ(cv::norm(prev, frames[events[0].frame.index - 1].image, cv::NORM_INF), 0.0);

  EventFrame first = events[0];
  first.frame.index = 0;
  cv::Mat painted = segmentation_screen(frames, first, {});
  EXPECT_FALSE(detect_touch({0, painted, 0.0}, {}));
  cv::Mat clean = frames[events[0].frame.index - 1].image;
  cv::Mat diff;
  cv::absdiff(painted, clean, diff);
  EXPECT_LT(cv::mean(diff)[0], 1.0);
}

TEST(Pipeline, AnalyzeMatchesGroundTruth) {
  auto s = sign_in_recording();
  GlyphTextExtractor ocr;
  RecordingManifest m{"aurora-sign_in", "aurora", "sign_in", 30.0, 0, 0};
  auto a = analyze_recording(make_frames(s.rec.frames, 30), m, ocr);
  EXPECT_EQ(a.manifest.width, 360);
  ASSERT_EQ(a.events.size(), s.rec.truth.events.size());
  ASSERT_EQ(a.kept.size(), s.rec.truth.retained_count());
  std::size_t k = 0;
  for (const auto& t : s.rec.truth.events) {
    if (t.typing) continue;
    const auto& ev = a.kept[k++];
    EXPECT_EQ(ev.gui.frame_index, t.frame_index);
    EXPECT_EQ(ev.gui.action.kind, t.action);
    ASSERT_TRUE(ev.gui.widget.has_value());
    EXPECT_TRUE(t.widget_box.expanded(3).contains(ev.gui.widget->element.box)) << t.widget_id;
    EXPECT_EQ(ev.screen_features.values.size(), a.final_features.values.size());
  }
  EXPECT_EQ(a.final_screen.size(), s.rec.frames.back().size());
}

TEST(Pipeline, WriteAnalysisAndAutoLabel) {
  FixtureSpec spec = default_fixture_spec(11, false);
  spec.recordings = {spec.recordings[0]};
  GlyphTextExtractor ocr;
  auto set = generate_fixtures(spec, default_taxonomy(), ocr);
  auto root = fs::temp_directory_path() / "ugen_pipeline_test";
  fs::remove_all(root);
  write_fixtures(set, spec, root);
  const auto& truth = set.recordings[0].truth;
  const fs::path rec_dir = root / "recordings" / truth.recording_id;

  auto a = analyze_recording_dir(rec_dir, ocr);
  EXPECT_EQ(a.manifest.app_id, truth.app_id);
  EXPECT_EQ(a.manifest.usage_id, "sign_in");
  const fs::path out = root / "analysis";
  write_analysis(a, out);
  auto events = nlohmann::json::parse(slurp(out / "events.json"));
  ASSERT_EQ(events.size(), truth.events.size());
  EXPECT_EQ(events[2]["reason"], truth.events[2].typing ? "typing" : "none");
  auto gui = nlohmann::json::parse(slurp(out / "gui_events.json"));
  ASSERT_EQ(gui.size(), truth.retained_count());
  for (const auto& g : gui) {
    EXPECT_TRUE(fs::exists(out / g["screen"].get<std::string>()));
    EXPECT_TRUE(fs::exists(out / g["abstraction"].get<std::string>()));
    if (!g["widget"].is_null()) EXPECT_TRUE(fs::exists(out / g["widget"]["crop"].get<std::string>()));
  }
  EXPECT_TRUE(fs::exists(out / "final.png"));

  auto screens = train(set.screen_examples, ModelKind::KNN);
  auto widgets = train(set.widget_examples, ModelKind::KNN);
  LabeledTrace labeled = auto_label(a, screens, widgets, default_taxonomy());
  LabeledTrace expected = truth.labeled_trace();
  EXPECT_EQ(labeled.usage_id, expected.usage_id);
  EXPECT_EQ(labeled.final_screen, expected.final_screen);
  ASSERT_EQ(labeled.steps.size(), expected.steps.size());
  for (std::size_t i = 0; i < labeled.steps.size(); ++i) {
    EXPECT_EQ(labeled.steps[i].screen, expected.steps[i].screen) << i;
    EXPECT_EQ(labeled.steps[i].widget, expected.steps[i].widget) << i;
    EXPECT_EQ(labeled.steps[i].action, expected.steps[i].action) << i;
  }

  fs::create_directories(root / "empty");
  try {
    analyze_recording_dir(root / "empty", ocr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyRecording);
  }
  fs::remove_all(root);
}

}  // namespace
}  // namespace ugen
