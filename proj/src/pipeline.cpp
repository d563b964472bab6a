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

#include "ugen/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ugen/error.hpp"

namespace ugen {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string frame_name(int index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d.png", index);
  return buf;
}

void write_png(const std::filesystem::path& p, const cv::Mat& img) {
  if (img.empty() || !cv::imwrite(p.string(), img)) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

json box_json(const BoundingBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

}  // namespace

// ---------------------------------------------------------------- manifest

std::string RecordingManifest::to_toml() const {
  std::ostringstream out;
  out << "recording_id = " << json(recording_id).dump() << "\n"
      << "app_id = " << json(app_id).dump() << "\n"
      << "usage_id = " << json(usage_id).dump() << "\n"
      << "fps = " << json(fps).dump() << "\n"
      << "width = " << width << "\n"
      << "height = " << height << "\n";
  return out.str();
}

RecordingManifest RecordingManifest::parse(std::string_view text) {
  RecordingManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::InvalidInput, "recording manifest line " + std::to_string(n) + ": " + why);
    };
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    std::string raw = trim(std::string_view(t).substr(eq + 1));
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      fail("bad value for '" + key + "'");
    }
    try {
      if (key == "recording_id") m.recording_id = value.get<std::string>();
      else if (key == "app_id") m.app_id = value.get<std::string>();
      else if (key == "usage_id") m.usage_id = value.get<std::string>();
      else if (key == "fps") m.fps = value.get<double>();
      else if (key == "width") m.width = value.get<int>();
      else if (key == "height") m.height = value.get<int>();
    } catch (const json::exception&) {
      fail("wrong type for '" + key + "'");
    }
  }
  if (!(m.fps > 0.0)) throw Error(ErrorCode::InvalidInput, "recording manifest: fps must be positive");
  if (m.width < 0 || m.height < 0) throw Error(ErrorCode::InvalidInput, "recording manifest: negative size");
  return m;
}

RecordingManifest RecordingManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- analysis

cv::Mat segmentation_screen(const std::vector<Frame>& frames, const EventFrame& event,
                            const render::IndicatorStyle& style) {
  const int idx = event.frame.index;
  if (idx > 0 && idx - 1 < static_cast<int>(frames.size())) return frames[idx - 1].image.clone();
  cv::Mat img = event.frame.image.clone();
  const cv::Point c(event.touch.center.x, event.touch.center.y);
  cv::Mat ring(img.size(), CV_8U, cv::Scalar(0));
  cv::circle(ring, c, style.radius + 5, cv::Scalar(255), cv::FILLED);
  cv::circle(ring, c, style.radius + 2, cv::Scalar(0), cv::FILLED);
  const cv::Scalar fill = cv::mean(img, ring);
  cv::circle(img, c, style.radius + 2, fill, cv::FILLED);
  return img;
}

RecordingAnalysis analyze_recording(const std::vector<Frame>& frames, RecordingManifest manifest,
                                    const TextExtraction& extractor, const PipelineConfig& config) {
  if (frames.empty()) throw Error(ErrorCode::EmptyRecording, "recording has no frames");
  RecordingAnalysis out;
  manifest.width = frames.front().image.cols;
  manifest.height = frames.front().image.rows;
  out.manifest = std::move(manifest);
  out.events = extract_event_frames(frames, out.manifest.fps, config.analysis);

  auto analyze_screen = [&](const cv::Mat& screen, std::vector<GuiElement>& elements, AbstractScreen& abstraction,
                            FeatureVector& features) {
    elements = group_elements(segment_screen(screen, extractor, config.segment), config.line_threshold);
    attach_crops(elements, screen);
    abstraction = abstract_screen(screen, elements);
    features = screen_features(screen, abstraction, extractor);
  };

  for (std::size_t i = 0; i < out.events.size(); ++i) {
    const EventFrame& ev = out.events[i];
    if (ev.filtered != FilterReason::None) continue;
    AnalyzedEvent a;
    a.event_index = i;
    a.screen = segmentation_screen(frames, ev, config.analysis.touch.style);
    analyze_screen(a.screen, a.elements, a.abstraction, a.screen_features);
    a.gui = build_gui_event(ev, a.screen, a.elements, config.select);
    out.kept.push_back(std::move(a));
  }

  const Frame& last = frames.back();
  if (auto touch = detect_touch(last, config.analysis.touch)) {
    EventFrame tail;
    tail.frame = last;
    tail.frame.index = 0;
    tail.touch = *touch;
    out.final_screen = segmentation_screen(frames, tail, config.analysis.touch.style);
  } else {
    out.final_screen = last.image.clone();
  }
  std::vector<GuiElement> final_elements;
  analyze_screen(out.final_screen, final_elements, out.final_abstraction, out.final_features);
  return out;
}

RecordingAnalysis analyze_recording_dir(const std::filesystem::path& dir, const TextExtraction& extractor,
                                        const PipelineConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  RecordingManifest manifest;
  if (fs::exists(dir / "recording.toml")) manifest = RecordingManifest::load(dir / "recording.toml");
  if (manifest.recording_id.empty()) manifest.recording_id = fs::absolute(dir).lexically_normal().filename().string();
  if (manifest.recording_id.empty()) manifest.recording_id = fs::absolute(dir).parent_path().filename().string();
  const fs::path frame_dir = fs::is_directory(dir / "frames") ? dir / "frames" : dir;
  auto frames = load_frames(frame_dir, manifest.fps);
  if (manifest.width > 0 && manifest.height > 0 &&
      (frames.front().image.cols != manifest.width || frames.front().image.rows != manifest.height)) {
    throw Error(ErrorCode::DimensionMismatch, dir.string() + ": frames are " +
                                                  std::to_string(frames.front().image.cols) + "x" +
                                                  std::to_string(frames.front().image.rows) + ", manifest says " +
                                                  std::to_string(manifest.width) + "x" + std::to_string(manifest.height));
  }
  return analyze_recording(frames, std::move(manifest), extractor, config);
}

// ---------------------------------------------------------------- outputs

std::string events_json(const std::vector<EventFrame>& events) {
  json arr = json::array();
  for (const auto& e : events) {
    const bool typing = e.filtered == FilterReason::Typing;
    arr.push_back({{"frame_index", e.frame.index},
                   {"action",
                    {{"kind", to_string(e.action.kind)},
                     {"start", {e.action.start.x, e.action.start.y}},
                     {"end", {e.action.end.x, e.action.end.y}},
                     {"duration_frames", e.action.duration_frames}}},
                   {"touch", {{"x", e.touch.center.x}, {"y", e.touch.center.y}}},
                   {"filtered", typing},
                   {"reason", typing ? "typing" : "none"}});
  }
  return arr.dump(1) + "\n";
}

std::string gui_events_json(const RecordingAnalysis& analysis) {
  json arr = json::array();
  for (const auto& a : analysis.kept) {
    const std::string name = frame_name(a.gui.frame_index);
    json item = {{"frame_index", a.gui.frame_index},
                 {"screen", "screens/" + name},
                 {"abstraction", "abstract/" + name},
                 {"action", to_string(a.gui.action.kind)},
                 {"widget", nullptr}};
    if (a.gui.widget) {
      const Widget& w = *a.gui.widget;
      item["widget"] = {{"crop", "crops/" + name},
                        {"box", box_json(w.element.box)},
                        {"kind", to_string(w.element.kind)},
                        {"text", w.element.text},
                        {"class_type", to_string(w.class_type)},
                        {"zone", w.zone}};
    }
    arr.push_back(std::move(item));
  }
  return arr.dump(1) + "\n";
}

void write_analysis(const RecordingAnalysis& analysis, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  for (const char* sub : {"screens", "crops", "abstract"}) fs::create_directories(out_dir / sub);
  write_text(out_dir / "events.json", events_json(analysis.events));
  write_text(out_dir / "gui_events.json", gui_events_json(analysis));
  write_text(out_dir / "recording.toml", analysis.manifest.to_toml());
  for (const auto& a : analysis.kept) {
    const std::string name = frame_name(a.gui.frame_index);
    write_png(out_dir / "screens" / name, a.screen);
    write_png(out_dir / "abstract" / name, a.abstraction.image);
    if (a.gui.widget) write_png(out_dir / "crops" / name, a.gui.widget->element.crop);
  }
  write_png(out_dir / "final.png", analysis.final_screen);
}

LabeledTrace auto_label(const RecordingAnalysis& analysis, const Categorizer& screen_classifier,
                        const Categorizer& widget_classifier, const CanonicalTaxonomy& taxonomy) {
  if (analysis.kept.empty()) throw Error(ErrorCode::EmptyRecording, "no events to label");
  auto top1 = [](const Categorizer& c, const FeatureVector& f) {
    auto p = c.predict_topk(f, 1);
    if (p.empty()) throw Error(ErrorCode::InvalidInput, "classifier returned no category");
    return p.top();
  };
  LabeledTrace trace;
  trace.usage_id = analysis.manifest.usage_id;
  trace.source = {analysis.manifest.app_id, analysis.manifest.recording_id};
  for (const auto& a : analysis.kept) {
    TraceStep step;
    step.screen = top1(screen_classifier, a.screen_features);
    step.action = a.gui.action.kind;
    if (a.gui.widget) step.widget = top1(widget_classifier, widget_features(*a.gui.widget, step.screen, taxonomy));
    trace.steps.push_back(std::move(step));
  }
  trace.final_screen = top1(screen_classifier, analysis.final_features);
  return trace;
}

}  // namespace ugen
