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

#include "ugen/video.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ugen/error.hpp"

namespace ugen {

namespace fs = std::filesystem;

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Click: return "click";
    case ActionKind::LongTap: return "long_tap";
    case ActionKind::SwipeUp: return "swipe_up";
    case ActionKind::SwipeDown: return "swipe_down";
    case ActionKind::SwipeLeft: return "swipe_left";
    case ActionKind::SwipeRight: return "swipe_right";
  }
  return "click";
}

ActionKind parse_action_kind(std::string_view text) {
  for (ActionKind k : {ActionKind::Click, ActionKind::LongTap, ActionKind::SwipeUp, ActionKind::SwipeDown,
                       ActionKind::SwipeLeft, ActionKind::SwipeRight}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidInput, "unknown action kind '" + std::string(text) + "'");
}

std::vector<Frame> make_frames(std::vector<cv::Mat> images, double fps) {
  if (images.empty()) throw Error(ErrorCode::EmptyRecording, "recording has no frames");
  if (!(fps > 0)) throw Error(ErrorCode::InvalidInput, "fps must be positive");
  std::vector<Frame> frames;
  frames.reserve(images.size());
  const cv::Size size = images.front().size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    cv::Mat& img = images[i];
    if (img.empty()) throw Error(ErrorCode::EmptyRecording, "frame " + std::to_string(i) + " is empty");
    if (img.size() != size) {
      throw Error(ErrorCode::DimensionMismatch, "frame " + std::to_string(i) + " is " + std::to_string(img.cols) + "x" +
                                                    std::to_string(img.rows) + ", expected " +
                                                    std::to_string(size.width) + "x" + std::to_string(size.height));
    }
    if (img.type() != CV_8UC3) {
      cv::Mat conv;
      if (img.channels() == 1) cv::cvtColor(img, conv, cv::COLOR_GRAY2BGR);
      else if (img.channels() == 4) cv::cvtColor(img, conv, cv::COLOR_BGRA2BGR);
      else throw Error(ErrorCode::InvalidInput, "unsupported frame format");
      img = conv;
    }
    frames.push_back({static_cast<int>(i), img, 1000.0 * static_cast<double>(i) / fps});
  }
  return frames;
}

std::vector<Frame> load_frames(const fs::path& dir, double fps) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<cv::Mat> images;
  images.reserve(files.size());
  for (const auto& f : files) {
    cv::Mat img = cv::imread(f.string(), cv::IMREAD_COLOR);
    if (img.empty()) throw Error(ErrorCode::IoError, "cannot decode " + f.string());
    images.push_back(std::move(img));
  }
  return make_frames(std::move(images), fps);
}

// ---------------------------------------------------------------------------
// touch detection

namespace {

cv::Mat to_gray(const cv::Mat& bgr) {
  cv::Mat g;
  if (bgr.channels() == 1) return bgr;
  cv::cvtColor(bgr, g, cv::COLOR_BGR2GRAY);
  return g;
}

double luma(render::Color c) { return 0.114 * c[0] + 0.587 * c[1] + 0.299 * c[2]; }

// Zero-mean indicator pattern over the disk (zero outside it) plus the disk
// mask. Correlating only inside the disk makes the score independent of the
// background and of the blend opacity.
struct DiskKernel {
  cv::Mat pattern;
  cv::Mat mask;
  double pattern_norm = 0.0;
  double count = 0.0;
};

DiskKernel build_kernel(const render::IndicatorStyle& style) {
  const int r = style.radius, side = 2 * r + 1;
  const int inner2 = (r - style.rim_width) * (r - style.rim_width);
  DiskKernel k;
  k.pattern = cv::Mat::zeros(side, side, CV_64F);
  k.mask = cv::Mat::zeros(side, side, CV_64F);
  double sum = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      int d2 = dx * dx + dy * dy;
      if (d2 > r * r) continue;
      double v = d2 > inner2 ? luma(style.rim) : luma(style.fill);
      k.pattern.at<double>(dy + r, dx + r) = v;
      k.mask.at<double>(dy + r, dx + r) = 1.0;
      sum += v;
      k.count += 1.0;
    }
  }
  const double mean = sum / k.count;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      if (k.mask.at<double>(y, x) > 0) k.pattern.at<double>(y, x) -= mean;
  k.pattern_norm = std::sqrt(k.pattern.dot(k.pattern));
  return k;
}

double estimate_opacity(const cv::Mat& gray, Point c, const render::IndicatorStyle& style) {
  const int r = style.radius;
  const int inner = r - style.rim_width;
  double fill_sum = 0, rim_sum = 0;
  int fill_n = 0, rim_n = 0;
  for (int dy = -r; dy <= r; ++dy) {
    int y = c.y + dy;
    if (y < 0 || y >= gray.rows) continue;
    for (int dx = -r; dx <= r; ++dx) {
      int x = c.x + dx;
      if (x < 0 || x >= gray.cols) continue;
      double d = std::sqrt(static_cast<double>(dx * dx + dy * dy));
      double v = gray.at<uchar>(y, x);
      if (d < inner - 1.5) {
        fill_sum += v;
        ++fill_n;
      } else if (d > inner + 0.5 && d < r - 0.5) {
        rim_sum += v;
        ++rim_n;
      }
    }
  }
  if (fill_n == 0 || rim_n == 0) return 0.0;
  double denom = luma(style.fill) - luma(style.rim);
  if (std::abs(denom) < 1e-9) return 1.0;
  return std::clamp((fill_sum / fill_n - rim_sum / rim_n) / denom, 0.0, 1.0);
}

}  // namespace

std::optional<TouchPoint> detect_touch(const Frame& frame, const TouchDetectConfig& config) {
  if (frame.image.empty()) return std::nullopt;
  thread_local std::map<std::pair<int, int>, DiskKernel> cache;
  const auto key = std::make_pair(config.style.radius, config.style.rim_width);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_kernel(config.style)).first;
  const DiskKernel& k = it->second;
  if (k.pattern_norm <= 0) throw Error(ErrorCode::InvalidInput, "indicator has no contrast");

  cv::Mat gray = to_gray(frame.image), img, img2, num, s1, s2;
  gray.convertTo(img, CV_64F);
  img2 = img.mul(img);
  cv::filter2D(img, num, CV_64F, k.pattern, {-1, -1}, 0, cv::BORDER_REPLICATE);
  cv::filter2D(img, s1, CV_64F, k.mask, {-1, -1}, 0, cv::BORDER_REPLICATE);
  cv::filter2D(img2, s2, CV_64F, k.mask, {-1, -1}, 0, cv::BORDER_REPLICATE);

  double best = -1.0;
  Point best_pt;
  for (int y = 0; y < img.rows; ++y) {
    const double* pn = num.ptr<double>(y);
    const double* p1 = s1.ptr<double>(y);
    const double* p2 = s2.ptr<double>(y);
    for (int x = 0; x < img.cols; ++x) {
      double var = p2[x] - p1[x] * p1[x] / k.count;
      if (var < k.count) continue;  // flat window, sd below one grey level
      double score = pn[x] / (k.pattern_norm * std::sqrt(var));
      if (score > best) {
        best = score;
        best_pt = {x, y};
      }
    }
  }
  if (best < config.min_match_score) return std::nullopt;
  TouchPoint tp;
  tp.frame_index = frame.index;
  tp.center = best_pt;
  tp.match_score = std::clamp(best, 0.0, 1.0);
  tp.opacity_estimate = estimate_opacity(gray, best_pt, config.style);
  return tp;
}

std::vector<TouchFrameGroup> group_touch_frames(const std::vector<std::optional<TouchPoint>>& touches) {
  std::vector<TouchFrameGroup> groups;
  TouchFrameGroup cur;
  for (std::size_t i = 0; i < touches.size(); ++i) {
    if (touches[i]) {
      if (cur.touches.empty()) cur.event_frame_index = touches[i]->frame_index;
      cur.touches.push_back(*touches[i]);
    } else if (!cur.touches.empty()) {
      groups.push_back(std::move(cur));
      cur = {};
    }
  }
  if (!cur.touches.empty()) groups.push_back(std::move(cur));
  return groups;
}

UserAction classify_action(const TouchFrameGroup& group, const ActionConfig& config, double fps) {
  if (group.touches.empty()) throw Error(ErrorCode::InvalidInput, "empty touch group");
  UserAction a;
  a.start = group.touches.front().center;
  a.end = group.touches.back().center;
  a.duration_frames = static_cast<int>(group.touches.size());
  const int long_frames = static_cast<int>(std::ceil(config.long_tap_seconds * fps - 1e-9));
  const ActionKind tap = a.duration_frames >= long_frames ? ActionKind::LongTap : ActionKind::Click;
  const double dx = a.end.x - a.start.x, dy = a.end.y - a.start.y;
  if (std::hypot(dx, dy) <= config.click_displacement_max) {
    a.kind = tap;
    return a;
  }
  const double ax = std::abs(dx), ay = std::abs(dy);
  if (std::max(ax, ay) > config.swipe_displacement_min) {
    if (ax >= ay) a.kind = dx > 0 ? ActionKind::SwipeRight : ActionKind::SwipeLeft;
    else a.kind = dy > 0 ? ActionKind::SwipeDown : ActionKind::SwipeUp;
  } else {
    a.kind = tap;
  }
  return a;
}

// ---------------------------------------------------------------------------
// keyboard detection

cv::Mat keyboard_crop(const cv::Mat& image, double region_fraction) {
  int region = std::clamp(static_cast<int>(std::lround(region_fraction * image.rows)), 1, image.rows);
  return image(cv::Rect(0, image.rows - region, image.cols, region));
}

FeatureVector keyboard_features(const cv::Mat& crop) {
  constexpr int kGrid = 8;
  FeatureVector fv{"keyboard-v1", std::vector<double>(kGrid * kGrid + 1, 0.0)};
  if (crop.empty()) return fv;
  cv::Mat grad;
  cv::morphologyEx(crop, grad, cv::MORPH_GRADIENT, cv::getStructuringElement(cv::MORPH_RECT, {3, 3}));
  std::vector<cv::Mat> ch;
  cv::split(grad, ch);
  cv::Mat mx = ch[0];
  for (std::size_t i = 1; i < ch.size(); ++i) cv::max(mx, ch[i], mx);
  cv::Mat edges = mx > 24;

  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      int x0 = gx * edges.cols / kGrid, x1 = (gx + 1) * edges.cols / kGrid;
      int y0 = gy * edges.rows / kGrid, y1 = (gy + 1) * edges.rows / kGrid;
      if (x1 <= x0 || y1 <= y0) continue;
      cv::Mat cell = edges(cv::Rect(x0, y0, x1 - x0, y1 - y0));
      fv.values[gy * kGrid + gx] = static_cast<double>(cv::countNonZero(cell)) / (cell.rows * cell.cols);
    }
  }

  // column profile autocorrelation over key-pitch lags
  std::vector<double> prof(edges.cols, 0.0);
  for (int x = 0; x < edges.cols; ++x) prof[x] = cv::countNonZero(edges.col(x));
  double mean = 0;
  for (double v : prof) mean += v;
  mean /= std::max<std::size_t>(1, prof.size());
  double energy = 0;
  for (double& v : prof) {
    v -= mean;
    energy += v * v;
  }
  double period = 0;
  if (energy > 1e-9) {
    int lo = std::max(2, edges.cols / 14), hi = std::max(lo, edges.cols / 6);
    for (int lag = lo; lag <= hi && lag < edges.cols; ++lag) {
      double s = 0;
      for (int x = 0; x + lag < edges.cols; ++x) s += prof[x] * prof[x + lag];
      period = std::max(period, s / energy);
    }
  }
  fv.values.back() = std::clamp(period, 0.0, 1.0);
  return fv;
}

namespace {

cv::Mat random_screen(std::mt19937_64& rng, int w, int h) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  cv::Mat img(h, w, CV_8UC3);
  const int bg = pick(200, 255);
  img.setTo(cv::Scalar(bg, bg - pick(0, 10), bg - pick(0, 20)));
  const int mode = pick(0, 3);
  if (mode == 0) return img;  // blank
  const int items = pick(2, 10);
  static constexpr std::string_view kWords[] = {"HOME", "SETTINGS", "ABOUT US", "CART", "PRICE $12", "MENU",
                                                "SIGN IN", "HELP", "CONTACT", "ORDER NOW"};
  for (int i = 0; i < items; ++i) {
    int y = pick(0, h - 40), x = pick(0, w - 120);
    switch (pick(0, 3)) {
      case 0:
        render::draw_text(img, {x, y}, kWords[pick(0, 9)], pick(2, 3), render::rgb(30, 30, 30));
        break;
      case 1:
        render::fill_rect(img, {x, y, pick(60, 200), pick(24, 48)}, render::rgb(pick(0, 255), pick(0, 255), 200));
        break;
      case 2:
        render::stroke_rect(img, {x, y, pick(80, 220), pick(30, 60)}, render::rgb(90, 90, 90), 2);
        break;
      default:
        render::draw_icon(img, {x, y, 28, 28}, static_cast<render::IconShape>(pick(0, 5)), render::rgb(40, 40, 40));
        break;
    }
  }
  return img;
}

std::shared_ptr<const Categorizer> train_builtin_keyboard() {
  std::mt19937_64 rng(7);
  const std::vector<render::KeyboardStyle> styles = {
      {},
      {render::rgb(40, 42, 46), render::rgb(80, 82, 88), render::rgb(240, 240, 240)},
      {render::rgb(230, 230, 235), render::rgb(255, 255, 255), render::rgb(60, 60, 60)},
  };
  const std::vector<cv::Size> sizes = {{360, 640}, {320, 568}, {480, 800}};
  std::vector<LabeledExample> examples;
  for (const auto& size : sizes) {
    for (int i = 0; i < 12; ++i) {
      cv::Mat screen = random_screen(rng, size.width, size.height);
      examples.push_back({keyboard_features(keyboard_crop(screen, 0.35)), "none", "builtin", "", i});
      cv::Mat kb = screen.clone();
      render::draw_keyboard(kb, 0.35, styles[i % styles.size()]);
      examples.push_back({keyboard_features(keyboard_crop(kb, 0.35)), "keyboard", "builtin", "", i});
    }
    for (int v : {0, 128, 255}) {
      cv::Mat flat(size.height, size.width, CV_8UC3, cv::Scalar(v, v, v));
      examples.push_back({keyboard_features(keyboard_crop(flat, 0.35)), "none", "builtin", "", -1});
    }
  }
  Hyperparams hp;
  hp.knn_k = 3;
  return std::make_shared<ClassifierModel>(train(examples, ModelKind::KNN, hp));
}

}  // namespace

std::shared_ptr<const Categorizer> builtin_keyboard_classifier() {
  static std::once_flag once;
  static std::shared_ptr<const Categorizer> model;
  std::call_once(once, [] { model = train_builtin_keyboard(); });
  return model;
}

KeyboardDecision detect_keyboard(const Frame& frame, const KeyboardConfig& config) {
  auto clf = config.classifier ? config.classifier : builtin_keyboard_classifier();
  TopKPrediction p = clf->predict_topk(keyboard_features(keyboard_crop(frame.image, config.region_fraction)), 2);
  KeyboardDecision d;
  d.confidence = p.confidence("keyboard");
  d.keyboard = !p.empty() && p.top() == "keyboard";
  return d;
}

void mark_typing_events(std::vector<EventFrame>& events, const KeyboardConfig& config) {
  for (EventFrame& e : events) {
    const int h = e.frame.image.rows;
    const double boundary = (1.0 - config.region_fraction) * h;
    if (e.touch.center.y < boundary) continue;
    if (detect_keyboard(e.frame, config).keyboard) e.filtered = FilterReason::Typing;
  }
}

std::vector<EventFrame> filter_event_frames(std::vector<EventFrame> events, const KeyboardConfig& config) {
  mark_typing_events(events, config);
  std::erase_if(events, [](const EventFrame& e) { return e.filtered != FilterReason::None; });
  return events;
}

std::vector<EventFrame> extract_event_frames(const std::vector<Frame>& frames, double fps,
                                             const AnalysisConfig& config) {
  if (frames.empty()) throw Error(ErrorCode::EmptyRecording, "recording has no frames");
  std::vector<std::optional<TouchPoint>> touches;
  touches.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    // identical consecutive frames share one detection
    if (i > 0 && frames[i].image.size() == frames[i - 1].image.size() &&
        cv::norm(frames[i].image, frames[i - 1].image, cv::NORM_INF) == 0) {
      std::optional<TouchPoint> t = touches.back();
      if (t) t->frame_index = frames[i].index;
      touches.push_back(t);
      continue;
    }
    touches.push_back(detect_touch(frames[i], config.touch));
  }
  std::vector<EventFrame> events;
  for (const TouchFrameGroup& g : group_touch_frames(touches)) {
    EventFrame e;
    e.frame = frames.at(static_cast<std::size_t>(g.event_frame_index));
    e.touch = g.touches.front();
    e.action = classify_action(g, config.action, fps);
    events.push_back(std::move(e));
  }
  mark_typing_events(events, config.keyboard);
  return events;
}

}  // namespace ugen
