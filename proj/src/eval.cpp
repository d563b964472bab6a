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

#include "ugen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ugen/error.hpp"
#include "ugen/features.hpp"
#include "ugen/gui.hpp"
#include "ugen/pipeline.hpp"

namespace ugen {

using nlohmann::json;

namespace {

json color_json(render::Color c) { return json::array({c[2], c[1], c[0]}); }

render::Color parse_color(const json& j) { return render::rgb(j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()); }

json point_json(Point p) { return json::array({p.x, p.y}); }
Point parse_point(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

[[noreturn]] void fixture_error(const std::string& msg) { throw Error(ErrorCode::FixtureError, msg); }

}  // namespace

// ---------------------------------------------------------------- spec I/O

std::string FixtureSpec::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["render"] = {{"fps", render.fps},
                   {"indicator",
                    {{"radius", render.indicator.radius},
                     {"rim_width", render.indicator.rim_width},
                     {"fill", color_json(render.indicator.fill)},
                     {"rim", color_json(render.indicator.rim)}}},
                   {"tap_opacity", render.tap_opacity},
                   {"idle_min", render.idle_min},
                   {"idle_max", render.idle_max},
                   {"swipe_frames", render.swipe_frames},
                   {"keyboard_fraction", render.keyboard_fraction}};
  doc["apps"] = json::array();
  for (const auto& a : apps) doc["apps"].push_back(json::parse(a.to_json()));
  doc["recordings"] = json::array();
  for (const auto& r : recordings) {
    json jr = {{"app_id", r.app_id}, {"usage_id", r.usage_id}, {"recording_id", r.recording_id}, {"steps", json::array()}};
    for (const auto& s : r.steps)
      jr["steps"].push_back({{"widget", opt_json(s.widget)}, {"action", to_string(s.action)}, {"text", opt_json(s.text)}});
    doc["recordings"].push_back(std::move(jr));
  }
  return doc.dump(1) + "\n";
}

FixtureSpec FixtureSpec::parse(const std::string& json_text) {
  FixtureSpec spec;
  try {
    json doc = json::parse(json_text);
    spec.seed = doc.value("seed", std::uint64_t{1});
    if (doc.contains("render")) {
      const auto& r = doc["render"];
      spec.render.fps = r.value("fps", 30.0);
      if (r.contains("indicator")) {
        const auto& ind = r["indicator"];
        spec.render.indicator.radius = ind.value("radius", 20);
        spec.render.indicator.rim_width = ind.value("rim_width", 3);
        if (ind.contains("fill")) spec.render.indicator.fill = parse_color(ind["fill"]);
        if (ind.contains("rim")) spec.render.indicator.rim = parse_color(ind["rim"]);
      }
      if (r.contains("tap_opacity")) spec.render.tap_opacity = r["tap_opacity"].get<std::vector<double>>();
      spec.render.idle_min = r.value("idle_min", 3);
      spec.render.idle_max = r.value("idle_max", 5);
      spec.render.swipe_frames = r.value("swipe_frames", 8);
      spec.render.keyboard_fraction = r.value("keyboard_fraction", 0.35);
    }
    for (const auto& ja : doc.at("apps")) spec.apps.push_back(AppScript::parse(ja.dump()));
    for (const auto& jr : doc.at("recordings")) {
      RecordingScript r;
      r.app_id = jr.at("app_id").get<std::string>();
      r.usage_id = jr.at("usage_id").get<std::string>();
      r.recording_id = jr.at("recording_id").get<std::string>();
      for (const auto& js : jr.at("steps"))
        r.steps.push_back({opt_string(js, "widget"), parse_action_kind(js.value("action", "click")), opt_string(js, "text")});
      spec.recordings.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("fixture spec: ") + e.what());
  }
  const auto& p = spec.render;
  if (p.fps <= 0 || p.tap_opacity.empty() || p.idle_min < 1 || p.idle_max < p.idle_min || p.swipe_frames < 2)
    throw Error(ErrorCode::InvalidInput, "fixture spec: render parameters out of range");
  return spec;
}

FixtureSpec FixtureSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------- ground truth

std::size_t GroundTruth::retained_count() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) { return !e.typing; }));
}

LabeledTrace GroundTruth::labeled_trace() const {
  LabeledTrace t;
  t.usage_id = usage_id;
  t.final_screen = final_screen_label;
  t.source = {app_id, recording_id};
  for (const auto& e : events) {
    if (e.typing) continue;
    if (!is_swipe(e.action) && !e.widget_label)
      throw Error(ErrorCode::InvalidInput, "ground truth event at frame " + std::to_string(e.frame_index) + " has no widget label");
    t.steps.push_back({e.screen_label, is_swipe(e.action) ? std::nullopt : e.widget_label, e.action});
  }
  return t;
}

OracleTrace GroundTruth::oracle_trace() const {
  OracleTrace t;
  t.usage_id = usage_id;
  t.final_device_screen = final_device_screen;
  t.final_screen = final_screen_label;
  for (const auto& e : events)
    if (!e.typing) t.steps.push_back({e.device_screen, e.screen_label, e.widget_id, e.action, e.text});
  return t;
}

std::string GroundTruth::to_json() const {
  json doc = {{"app_id", app_id},
              {"usage_id", usage_id},
              {"recording_id", recording_id},
              {"fps", fps},
              {"frame_count", frame_count},
              {"final_device_screen", final_device_screen},
              {"final_screen_label", final_screen_label},
              {"events", json::array()}};
  for (const auto& e : events) {
    doc["events"].push_back({{"frame_index", e.frame_index},
                             {"action", to_string(e.action)},
                             {"center", point_json(e.center)},
                             {"end", point_json(e.end)},
                             {"typing", e.typing},
                             {"device_screen", e.device_screen},
                             {"screen_label", e.screen_label},
                             {"widget_id", e.widget_id},
                             {"widget_label", opt_json(e.widget_label)},
                             {"widget_box", json::array({e.widget_box.x, e.widget_box.y, e.widget_box.w, e.widget_box.h})},
                             {"text", opt_json(e.text)}});
  }
  return doc.dump(1) + "\n";
}

GroundTruth GroundTruth::parse(const std::string& json_text) {
  GroundTruth t;
  try {
    json doc = json::parse(json_text);
    t.app_id = doc.at("app_id").get<std::string>();
    t.usage_id = doc.at("usage_id").get<std::string>();
    t.recording_id = doc.at("recording_id").get<std::string>();
    t.fps = doc.at("fps").get<double>();
    t.frame_count = doc.at("frame_count").get<int>();
    t.final_device_screen = doc.at("final_device_screen").get<std::string>();
    t.final_screen_label = doc.at("final_screen_label").get<std::string>();
    for (const auto& je : doc.at("events")) {
      GroundTruthEvent e;
      e.frame_index = je.at("frame_index").get<int>();
      e.action = parse_action_kind(je.at("action").get<std::string>());
      e.center = parse_point(je.at("center"));
      e.end = parse_point(je.at("end"));
      e.typing = je.at("typing").get<bool>();
      e.device_screen = je.at("device_screen").get<std::string>();
      e.screen_label = je.at("screen_label").get<std::string>();
      e.widget_id = je.at("widget_id").get<std::string>();
      e.widget_label = opt_string(je, "widget_label");
      const auto& b = je.at("widget_box");
      e.widget_box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      e.text = opt_string(je, "text");
      t.events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("ground truth: ") + e.what());
  }
  return t;
}

// ---------------------------------------------------------------- synthesis

Recording synthesize_recording(const AppScript& app, const RecordingScript& script, const RenderParams& params,
                               std::uint64_t seed) {
  if (app.app_id != script.app_id) fixture_error("recording " + script.recording_id + " targets app " + script.app_id);
  std::mt19937_64 rng(seed ^ fnv1a64(script.recording_id));
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  const int W = app.width, H = app.height, r = params.indicator.radius;
  const int keyboard_top = H - static_cast<int>(std::lround(params.keyboard_fraction * H));
  auto clamp_center = [&](Point p) {
    return Point{std::clamp(p.x, r + 1, W - r - 2), std::clamp(p.y, r + 1, H - r - 2)};
  };

  Recording rec;
  auto& truth = rec.truth;
  truth.app_id = app.app_id;
  truth.usage_id = script.usage_id;
  truth.recording_id = script.recording_id;
  truth.fps = params.fps;

  std::map<std::string, cv::Mat> cache;
  std::string cur = app.initial;
  bool keyboard = false;
  auto base = [&]() {
    std::string key = cur + (keyboard ? "+kb" : "");
    auto it = cache.find(key);
    if (it == cache.end()) {
      cv::Mat img = render_screen(app, app.screen(cur));
      if (keyboard) render::draw_keyboard(img, params.keyboard_fraction, {});
      it = cache.emplace(key, img).first;
    }
    return it->second;
  };
  auto idle = [&](int n) {
    for (int i = 0; i < n; ++i) rec.frames.push_back(base().clone());
  };
  auto touch_frames = [&](const std::vector<Point>& path, const std::vector<double>& opacity) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      cv::Mat img = base().clone();
      render::draw_indicator(img, path[i], opacity[std::min(i, opacity.size() - 1)], params.indicator);
      rec.frames.push_back(img);
    }
  };
  auto idle_gap = [&]() { idle(uniform(params.idle_min, params.idle_max)); };

  idle_gap();
  for (std::size_t si = 0; si < script.steps.size(); ++si) {
    const auto& step = script.steps[si];
    const auto& screen = app.screen(cur);
    const std::string where = script.recording_id + " step " + std::to_string(si + 1) + ": ";
    GroundTruthEvent ev;
    ev.device_screen = cur;
    ev.screen_label = screen.label;
    ev.frame_index = static_cast<int>(rec.frames.size());
    ev.action = step.action;
    const ScriptWidget* w = nullptr;

    if (is_swipe(step.action)) {
      if (step.widget) fixture_error(where + "a swipe cannot name a widget");
      Point from, to;
      const int jitter = uniform(-10, 10);
      const int span = keyboard ? keyboard_top : H;
      switch (step.action) {
        case ActionKind::SwipeUp: from = {W / 2 + jitter, span * 7 / 10}; to = {W / 2 + jitter, span * 3 / 10}; break;
        case ActionKind::SwipeDown: from = {W / 2 + jitter, span * 3 / 10}; to = {W / 2 + jitter, span * 7 / 10}; break;
        case ActionKind::SwipeLeft: from = {W * 8 / 10, H / 2 + jitter}; to = {W * 2 / 10, H / 2 + jitter}; break;
        default: from = {W * 2 / 10, H / 2 + jitter}; to = {W * 8 / 10, H / 2 + jitter}; break;
      }
      std::vector<Point> path;
      const int n = params.swipe_frames;
      for (int i = 0; i < n; ++i)
        path.push_back(clamp_center({from.x + (to.x - from.x) * i / (n - 1), from.y + (to.y - from.y) * i / (n - 1)}));
      ev.center = path.front();
      ev.end = path.back();
      touch_frames(path, {1.0});
    } else {
      if (!step.widget) fixture_error(where + "a tap needs a widget");
      w = screen.widget(*step.widget);
      if (!w) fixture_error(where + "no widget '" + *step.widget + "' on screen " + cur);
      if (keyboard && w->box.bottom() > keyboard_top) fixture_error(where + "widget '" + w->id + "' is under the keyboard");
      const int jx = std::min(8, w->box.w / 4), jy = std::min(6, w->box.h / 4);
      Point c = clamp_center({static_cast<int>(w->box.center_x()) + uniform(-jx, jx),
                              static_cast<int>(w->box.center_y()) + uniform(-jy, jy)});
      ev.center = ev.end = c;
      ev.widget_id = w->id;
      ev.widget_label = w->canonical;
      ev.widget_box = w->box;
      ev.text = step.text;
      if (step.action == ActionKind::LongTap) {
        const int n = static_cast<int>(std::ceil(0.5 * params.fps - 1e-9)) + 2;
        touch_frames(std::vector<Point>(static_cast<std::size_t>(n), c), {1.0});
      } else if (step.action == ActionKind::Click) {
        touch_frames(std::vector<Point>(params.tap_opacity.size(), c), params.tap_opacity);
      } else {
        fixture_error(where + "unsupported action");
      }
      if (step.text && !w->accepts_text()) fixture_error(where + "widget '" + w->id + "' takes no text");
    }

    auto next = app.next(cur, is_swipe(step.action) ? std::nullopt : step.widget, step.action);
    if (!next) fixture_error(where + "no transition for " + std::string(to_string(step.action)) + " on " + cur);
    truth.events.push_back(ev);
    cur = *next;
    keyboard = w && w->accepts_text();
    idle_gap();

    if (step.text) {
      for (char ch : *step.text) {
        GroundTruthEvent key;
        key.device_screen = cur;
        key.screen_label = app.screen(cur).label;
        key.frame_index = static_cast<int>(rec.frames.size());
        key.action = ActionKind::Click;
        key.typing = true;
        key.center = key.end = clamp_center(render::keyboard_key_center(ch, W, H, params.keyboard_fraction));
        touch_frames({key.center, key.center}, {1.0, 0.6});
        truth.events.push_back(key);
        idle(uniform(1, 2));
      }
      idle_gap();
    }
  }
  truth.final_device_screen = cur;
  truth.final_screen_label = app.screen(cur).label;
  truth.frame_count = static_cast<int>(rec.frames.size());
  return rec;
}

FixtureSet generate_fixtures(const FixtureSpec& spec, const CanonicalTaxonomy& taxonomy,
                             const TextExtraction& extractor) {
  FixtureSet set;
  set.apps = spec.apps;
  std::map<std::string, const AppScript*> by_id;
  for (const auto& a : set.apps) {
    try {
      a.validate();
    } catch (const Error& e) {
      fixture_error(std::string("app ") + a.app_id + ": " + e.what());
    }
    if (!by_id.emplace(a.app_id, &a).second) fixture_error("duplicate app id " + a.app_id);
  }
  std::set<std::string> rec_ids;
  for (const auto& r : spec.recordings) {
    auto it = by_id.find(r.app_id);
    if (it == by_id.end()) fixture_error("recording " + r.recording_id + " names unknown app " + r.app_id);
    if (!is_safe_identifier(r.recording_id) || !rec_ids.insert(r.recording_id).second)
      fixture_error("bad or duplicate recording id '" + r.recording_id + "'");
    set.recordings.push_back(synthesize_recording(*it->second, r, spec.render, spec.seed));
  }

  for (const auto& app : set.apps) {
    for (std::size_t si = 0; si < app.screens.size(); ++si) {
      const auto& s = app.screens[si];
      if (!taxonomy.has_screen(s.label)) fixture_error("screen " + app.app_id + "/" + s.id + " has unknown label '" + s.label + "'");
      cv::Mat img = render_screen(app, s);
      auto elements = extract_elements(img, extractor);
      set.screen_examples.push_back({screen_features(img, abstract_screen(img, elements), extractor), s.label, app.app_id,
                                     "screens", static_cast<int>(si)});
      const bool has_field = std::any_of(s.widgets.begin(), s.widgets.end(), [](const auto& w) { return w.accepts_text(); });
      if (has_field) {
        cv::Mat kb = img.clone();
        render::draw_keyboard(kb, spec.render.keyboard_fraction, {});
        auto kel = extract_elements(kb, extractor);
        set.screen_examples.push_back({screen_features(kb, abstract_screen(kb, kel), extractor), s.label, app.app_id,
                                       "screens-keyboard", static_cast<int>(si)});
      }
      for (const auto& w : s.widgets) {
        if (!w.canonical) continue;
        if (!taxonomy.has_widget(*w.canonical))
          fixture_error("widget " + app.app_id + "/" + s.id + "/" + w.id + " has unknown label '" + *w.canonical + "'");
        Point c{static_cast<int>(w.box.center_x()), static_cast<int>(w.box.center_y())};
        std::size_t idx = select_touched_index(elements, c);
        Widget widget = make_widget(elements, idx, app.width, app.height);
        set.widget_examples.push_back(
            {widget_features(widget, s.label, taxonomy), *w.canonical, app.app_id, s.id, static_cast<int>(si)});
      }
    }
  }
  return set;
}

void write_fixtures(const FixtureSet& set, const FixtureSpec& spec, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  auto write_text = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  };
  fs::create_directories(root / "apps");
  fs::create_directories(root / "datasets");
  for (const auto& a : set.apps) a.save(root / "apps" / (a.app_id + ".json"));
  std::ostringstream manifest;
  manifest << "UGEN-FIXTURES 1\nseed " << spec.seed << "\nfps " << spec.render.fps << "\napps " << set.apps.size()
           << "\nrecordings " << set.recordings.size() << "\n";
  for (const auto& r : set.recordings) {
    fs::path dir = root / "recordings" / r.truth.recording_id;
    fs::create_directories(dir / "frames");
    char name[32];
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      std::snprintf(name, sizeof name, "%04zu.png", i);
      if (!cv::imwrite((dir / "frames" / name).string(), r.frames[i]))
        throw Error(ErrorCode::IoError, "cannot write " + (dir / "frames" / name).string());
    }
    write_text(dir / "truth.json", r.truth.to_json());
    RecordingManifest m{r.truth.recording_id, r.truth.app_id, r.truth.usage_id, r.truth.fps, r.frames.front().cols,
                        r.frames.front().rows};
    write_text(dir / "recording.toml", m.to_toml());
    manifest << r.truth.recording_id << '\t' << r.truth.app_id << '\t' << r.truth.usage_id << '\t' << r.frames.size()
             << '\t' << r.truth.retained_count() << '\n';
  }
  write_text(root / "datasets" / "screens.ds", dataset_to_text(set.screen_examples));
  write_text(root / "datasets" / "widgets.ds", dataset_to_text(set.widget_examples));
  write_text(root / "spec.json", spec.to_json());
  write_text(root / "manifest.txt", manifest.str());
}

// ---------------------------------------------------------------- default fixture apps

namespace {

struct Palette {
  render::Color background, header, fill;
};

const Palette kPalettes[] = {
    {render::rgb(248, 248, 248), render::rgb(225, 232, 240), render::rgb(205, 222, 246)},
    {render::rgb(252, 250, 244), render::rgb(240, 228, 210), render::rgb(246, 214, 180)},
    {render::rgb(244, 248, 244), render::rgb(214, 236, 218), render::rgb(190, 230, 200)},
    {render::rgb(250, 246, 250), render::rgb(232, 220, 240), render::rgb(222, 204, 240)},
    {render::rgb(246, 248, 252), render::rgb(220, 226, 236), render::rgb(200, 212, 232)},
};

const char* const kAppIds[] = {"aurora", "birch", "cobalt", "dune", "ember"};

template <std::size_t N>
std::string pick(const char* const (&options)[N], int i) {
  return options[static_cast<std::size_t>(i) % N];
}

class AppBuilder {
 public:
  AppBuilder(int index, bool settings_via_account) : i_(index), via_account_(settings_via_account) {
    pal_ = kPalettes[index % 5];
    dy_ = (index % 3) * 8;
    app_.app_id = kAppIds[index % 5];
    app_.initial = "main";
  }

  AppScript build() {
    home();
    menu();
    sign_in();
    account();
    cart();
    search();
    settings();
    help();
    return app_;
  }

 private:
  ScriptScreen& screen(const std::string& id, const std::string& label, const std::string& title) {
    app_.screens.push_back({id, label, title, pal_.background, pal_.header, {}});
    return app_.screens.back();
  }

  ScriptWidget button(const std::string& id, BoundingBox box, const std::string& text,
                      std::optional<std::string> canonical) {
    ScriptWidget w;
    w.id = id;
    w.style = i_ % 2 == 0 ? WidgetStyle::Button : WidgetStyle::Outlined;
    w.box = box;
    w.text = text;
    w.fill = pal_.fill;
    w.canonical = std::move(canonical);
    return w;
  }

  ScriptWidget plain(const std::string& id, WidgetStyle style, BoundingBox box, const std::string& text,
                     std::optional<std::string> canonical = std::nullopt) {
    ScriptWidget w;
    w.id = id;
    w.style = style;
    w.box = box;
    w.text = text;
    w.canonical = std::move(canonical);
    return w;
  }

  void link(const std::string& from, const std::string& widget, const std::string& to) {
    app_.transitions.push_back({from, widget, ActionKind::Click, to});
  }
  void swipe(const std::string& from, ActionKind a) { app_.transitions.push_back({from, std::nullopt, a, from}); }

  void back_button(ScriptScreen& s, int y) {
    static const char* const kBack[] = {"BACK", "CLOSE", "BACK", "RETURN", "BACK"};
    s.widgets.push_back(button("back", {30, y, 120, 44}, pick(kBack, i_), "back"));
    link(s.id, "back", "main");
  }

  void home() {
    static const char* const kTitle[] = {"HOME", "HOME", "WELCOME", "HOME", "WELCOME"};
    static const char* const kSearch[] = {"SEARCH", "FIND", "SEARCH", "FIND ITEMS", "SEARCH"};
    static const char* const kCart[] = {"CART", "MY BAG", "CART", "MY BAG", "MY CART"};
    auto& s = screen("main", "home", pick(kTitle, i_));
    ScriptWidget m = plain("menu_icon", WidgetStyle::Icon, {i_ % 2 == 0 ? 304 : 268, 8, 40, 40}, "", "menu");
    m.icon = render::IconShape::Bars;
    s.widgets.push_back(m);
    s.widgets.push_back(button("search_btn", {40, 100 + dy_, 280, 48}, pick(kSearch, i_), "search"));
    s.widgets.push_back(button("cart_btn", {40, 170 + dy_, 280, 48}, pick(kCart, i_), "cart"));
    s.widgets.push_back(plain("promo", WidgetStyle::Text, {40, 260 + dy_, 240, 24}, "TODAY DEALS"));
    s.widgets.push_back(plain("promo2", WidgetStyle::Text, {40, 300 + dy_, 240, 24}, "NEW ARRIVALS"));
    link("main", "menu_icon", "drawer");
    link("main", "search_btn", "find");
    link("main", "cart_btn", "cart");
    swipe("main", ActionKind::SwipeUp);
    swipe("main", ActionKind::SwipeDown);
  }

  void menu() {
    static const char* const kTitle[] = {"MENU", "MORE", "MENU", "BROWSE", "MENU"};
    static const char* const kAccount[] = {"MY ACCOUNT", "PROFILE", "ACCOUNT", "MY PROFILE", "ACCOUNT"};
    static const char* const kSignIn[] = {"SIGN IN", "LOG IN", "SIGN IN", "SIGN IN", "LOG IN"};
    static const char* const kSettings[] = {"SETTINGS", "PREFERENCES", "SETTINGS", "PREFERENCES", "SETTINGS"};
    static const char* const kHelp[] = {"HELP", "SUPPORT", "HELP", "HELP", "SUPPORT"};
    auto& s = screen("drawer", "menu", pick(kTitle, i_));
    struct Item {
      std::string id, text;
      std::optional<std::string> canonical;
      std::string to;
    };
    std::vector<Item> items = {{"item_account", pick(kAccount, i_), "account", "profile"},
                               {"item_signin", pick(kSignIn, i_), "sign_in", "login"},
                               {"item_orders", "ORDERS", std::nullopt, ""},
                               {"item_help", pick(kHelp, i_), "help", "support"}};
    if (!via_account_) items.insert(items.begin() + 2, {"item_settings", pick(kSettings, i_), "settings", "prefs"});
    std::rotate(items.begin(), items.begin() + (i_ % 2), items.end());
    int y = 72 + dy_;
    for (const auto& it : items) {
      ScriptWidget w = plain(it.id, WidgetStyle::ListItem, {0, y, 360, 48}, it.text, it.canonical);
      w.parent_class = "ListView";
      s.widgets.push_back(w);
      if (!it.to.empty()) link("drawer", it.id, it.to);
      y += 56;
    }
    swipe("drawer", ActionKind::SwipeUp);
  }

  void sign_in() {
    static const char* const kTitle[] = {"SIGN IN", "LOG IN", "LOGIN", "SIGN IN", "LOG IN"};
    static const char* const kUser[] = {"EMAIL", "USERNAME", "EMAIL", "USERNAME", "EMAIL"};
    static const char* const kSubmit[] = {"SUBMIT", "CONTINUE", "DONE", "OK", "SUBMIT"};
    auto& s = screen("login", "sign_in", pick(kTitle, i_));
    s.widgets.push_back(plain("user_field", WidgetStyle::Field, {30, 90 + dy_, 300, 44}, pick(kUser, i_), "username"));
    s.widgets.push_back(plain("pass_field", WidgetStyle::Field, {30, 156 + dy_, 300, 44}, "PASSWORD", "password"));
    s.widgets.push_back(plain("remember", WidgetStyle::Checkbox, {30, 220 + dy_, 200, 28}, "REMEMBER ME"));
    s.widgets.push_back(button("submit_btn", {30, 280 + dy_, 300, 48}, pick(kSubmit, i_), "submit"));
    link("login", "user_field", "login");
    link("login", "pass_field", "login");
    link("login", "remember", "login");
    link("login", "submit_btn", "profile");
  }

  void account() {
    static const char* const kTitle[] = {"MY ACCOUNT", "PROFILE", "ACCOUNT", "MY PROFILE", "ACCOUNT"};
    auto& s = screen("profile", "account", pick(kTitle, i_));
    s.widgets.push_back(plain("orders", WidgetStyle::Text, {30, 90 + dy_, 200, 24}, "ORDERS"));
    s.widgets.push_back(plain("addresses", WidgetStyle::Text, {30, 130 + dy_, 200, 24}, "ADDRESSES"));
    if (via_account_) {
      ScriptWidget gear = plain("gear_icon", WidgetStyle::Icon, {296, 90 + dy_, 40, 40}, "", "settings");
      gear.icon = render::IconShape::Plus;
      s.widgets.push_back(gear);
      link("profile", "gear_icon", "prefs");
    }
    back_button(s, 200 + dy_);
  }

  void cart() {
    static const char* const kTitle[] = {"CART", "MY BAG", "BASKET", "CART", "MY CART"};
    auto& s = screen("cart", "shopping_cart", pick(kTitle, i_));
    s.widgets.push_back(plain("total", WidgetStyle::Text, {30, 90 + dy_, 200, 24}, "TOTAL"));
    s.widgets.push_back(button("checkout_btn", {30, 140 + dy_, 300, 48}, "CHECKOUT", std::nullopt));
    back_button(s, 220 + dy_);
  }

  void search() {
    static const char* const kTitle[] = {"SEARCH", "FIND", "SEARCH", "FIND ITEMS", "SEARCH"};
    static const char* const kField[] = {"SEARCH", "FIND", "SEARCH ITEMS", "FIND", "SEARCH"};
    static const char* const kGo[] = {"OK", "DONE", "SUBMIT", "OK", "DONE"};
    static const char* const kBuy[] = {"BUY", "ADD TO BAG", "BUY NOW", "PURCHASE", "BUY"};
    auto& s = screen("find", "search", pick(kTitle, i_));
    s.widgets.push_back(plain("query_field", WidgetStyle::Field, {30, 80 + dy_, 300, 44}, pick(kField, i_), "search"));
    s.widgets.push_back(button("go_btn", {30, 140 + dy_, 120, 44}, pick(kGo, i_), "submit"));
    s.widgets.push_back(plain("result", WidgetStyle::Text, {30, 220 + dy_, 200, 24}, "RED SHOES"));
    s.widgets.push_back(button("buy_btn", {30, 260 + dy_, 200, 44}, pick(kBuy, i_), "buy"));
    link("find", "query_field", "find");
    link("find", "go_btn", "find");
    link("find", "buy_btn", "cart");
    back_button(s, 340 + dy_);
  }

  void settings() {
    static const char* const kTitle[] = {"SETTINGS", "PREFERENCES", "SETTINGS", "PREFERENCES", "SETTINGS"};
    auto& s = screen("prefs", "settings", pick(kTitle, i_));
    s.widgets.push_back(plain("notify", WidgetStyle::Checkbox, {30, 90 + dy_, 240, 28}, "NOTIFICATIONS"));
    s.widgets.push_back(plain("dark", WidgetStyle::Checkbox, {30, 140 + dy_, 240, 28}, "DARK MODE"));
    link("prefs", "notify", "prefs");
    link("prefs", "dark", "prefs");
    back_button(s, 220 + dy_);
  }

  void help() {
    static const char* const kTitle[] = {"HELP", "SUPPORT", "FAQ", "HELP CENTER", "SUPPORT"};
    auto& s = screen("support", "help", pick(kTitle, i_));
    s.widgets.push_back(plain("howto", WidgetStyle::Text, {30, 90 + dy_, 240, 24}, "HOW TO ORDER"));
    s.widgets.push_back(plain("returns", WidgetStyle::Text, {30, 130 + dy_, 240, 24}, "RETURNS"));
    back_button(s, 220 + dy_);
    swipe("support", ActionKind::SwipeUp);
  }

  int i_;
  bool via_account_;
  Palette pal_;
  int dy_;
  AppScript app_;
};

RecordingStep tap(std::string widget, std::optional<std::string> text = std::nullopt) {
  return {std::move(widget), ActionKind::Click, std::move(text)};
}
RecordingStep swipe_step(ActionKind a) { return {std::nullopt, a, std::nullopt}; }

}  // namespace

FixtureSpec default_fixture_spec(std::uint64_t seed, bool unmatchable_usage) {
  static const char* const kUsers[] = {"ALICE", "BOB", "CAROL", "DAVE", "ERIN"};
  static const char* const kQueries[] = {"SHOES", "HAT", "SOCKS", "BELT", "SCARF"};
  FixtureSpec spec;
  spec.seed = seed;
  for (int i = 0; i < 5; ++i) {
    const bool via_account = unmatchable_usage && i == 4;
    spec.apps.push_back(AppBuilder(i, via_account).build());
    const std::string id = kAppIds[i];
    spec.recordings.push_back({id, "sign_in", id + "-sign_in",
                               {tap("menu_icon"), tap("item_signin"), tap("user_field", std::string(kUsers[i])),
                                tap("pass_field", "SECRET"), tap("submit_btn")}});
    spec.recordings.push_back({id, "add_cart", id + "-add_cart",
                               {tap("search_btn"), tap("query_field", std::string(kQueries[i])), tap("go_btn"),
                                tap("buy_btn")}});
    spec.recordings.push_back({id, "help", id + "-help",
                               {swipe_step(ActionKind::SwipeUp), tap("menu_icon"), swipe_step(ActionKind::SwipeUp),
                                tap("item_help")}});
    if (via_account)
      spec.recordings.push_back({id, "settings", id + "-settings",
                                 {swipe_step(ActionKind::SwipeDown), tap("menu_icon"), swipe_step(ActionKind::SwipeUp),
                                  tap("item_account"), tap("gear_icon")}});
    else
      spec.recordings.push_back({id, "settings", id + "-settings",
                                 {swipe_step(ActionKind::SwipeDown), tap("menu_icon"), swipe_step(ActionKind::SwipeUp),
                                  tap("item_settings")}});
  }
  return spec;
}

// ---------------------------------------------------------------- metrics

UsageSets usage_sets(const LabeledTrace& trace) {
  UsageSets s;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& st = trace.steps[i];
    s.states.insert(st.screen);
    const std::string& to = i + 1 < trace.steps.size() ? trace.steps[i + 1].screen : trace.final_screen;
    s.transitions.insert({st.screen, st.widget, st.action, to});
  }
  if (!trace.final_screen.empty()) s.states.insert(trace.final_screen);
  return s;
}

UsageSets usage_sets(const TestScript& script) {
  UsageSets s;
  const auto& ev = script.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    s.states.insert(ev[i].screen);
    std::optional<std::string> to;
    if (i + 1 < ev.size()) to = ev[i + 1].screen;
    else to = script.final_screen;
    if (to)
      s.transitions.insert({ev[i].screen, is_swipe(ev[i].action) ? std::nullopt : ev[i].canonical_widget, ev[i].action, *to});
  }
  if (!ev.empty() && script.final_screen) s.states.insert(*script.final_screen);
  return s;
}

namespace {

template <class T>
std::size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

SimilarityRow compute_similarity(const std::string& usage_id, const UsageSets& generated,
                                 const std::vector<std::pair<std::string, UsageSets>>& humans) {
  if (humans.empty()) throw Error(ErrorCode::InvalidInput, "no human tests for usage " + usage_id);
  std::optional<SimilarityRow> best;
  double best_score = -1.0;
  for (const auto& [id, h] : humans) {
    SimilarityRow row;
    row.usage_id = usage_id;
    row.closest_human = id;
    const std::size_t is = intersection_size(generated.states, h.states);
    const std::size_t it = intersection_size(generated.transitions, h.transitions);
    row.precision_states = ratio(is, generated.states.size());
    row.precision_transitions = ratio(it, generated.transitions.size());
    row.recall_states = ratio(is, h.states.size());
    row.recall_transitions = ratio(it, h.transitions.size());
    const double score = (row.precision_states + row.precision_transitions) / 2.0;
    if (!best || score > best_score || (score == best_score && id < best->closest_human)) {
      best = row;
      best_score = score;
    }
  }
  return *best;
}

SimilarityRow compute_similarity(const TestScript& generated, const std::vector<LabeledTrace>& humans) {
  std::vector<std::pair<std::string, UsageSets>> hs;
  for (const auto& h : humans) {
    if (h.usage_id != generated.usage_id)
      throw Error(ErrorCode::InvalidInput, "human test " + h.source.recording_id + " is for usage " + h.usage_id);
    hs.emplace_back(h.source.recording_id, usage_sets(h));
  }
  return compute_similarity(generated.usage_id, usage_sets(generated), hs);
}

double usage_success_rate(const std::vector<bool>& accomplished) {
  if (accomplished.empty()) throw Error(ErrorCode::InvalidInput, "no generation results");
  return ratio(static_cast<std::size_t>(std::count(accomplished.begin(), accomplished.end(), true)), accomplished.size());
}

RecommendationAccuracy widget_recommendation_accuracy(const std::vector<std::vector<StepLogRow>>& logs) {
  RecommendationAccuracy acc;
  for (const auto& log : logs)
    for (const auto& row : log) {
      ++acc.total;
      acc.hits += row.hit ? 1 : 0;
    }
  if (acc.total == 0) throw Error(ErrorCode::EmptyLog, "no recommendation steps logged");
  acc.accuracy = ratio(acc.hits, acc.total);
  return acc;
}

std::optional<SimilarityRow> average_row(const std::vector<SimilarityRow>& rows) {
  if (rows.empty()) return std::nullopt;
  SimilarityRow avg;
  avg.usage_id = "average";
  avg.tests = 0;
  for (const auto& r : rows) {
    avg.tests += r.tests;
    avg.precision_states += r.tests * r.precision_states;
    avg.precision_transitions += r.tests * r.precision_transitions;
    avg.recall_states += r.tests * r.recall_states;
    avg.recall_transitions += r.tests * r.recall_transitions;
  }
  if (avg.tests > 0) {
    avg.precision_states /= avg.tests;
    avg.precision_transitions /= avg.tests;
    avg.recall_states /= avg.tests;
    avg.recall_transitions /= avg.tests;
  }
  return avg;
}

std::string report_csv(const std::vector<SimilarityRow>& rows) {
  std::ostringstream out;
  out << "usage_id,tests,closest_human,precision_states,precision_transitions,recall_states,recall_transitions,"
         "comparison\n";
  auto line = [&](const SimilarityRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f", r.precision_states, r.precision_transitions, r.recall_states,
                  r.recall_transitions);
    out << r.usage_id << ',' << r.tests << ',' << r.closest_human << ',' << buf << ",set\n";
  };
  for (const auto& r : rows) line(r);
  if (auto avg = average_row(rows)) line(*avg);
  return out.str();
}

std::string report_table(const std::vector<SimilarityRow>& rows) {
  std::ostringstream out;
  out << "states and transitions compared as sets; closest human = max mean precision, ties to lower id\n";
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %5s %8s %8s %8s %8s  %s\n", "usage", "tests", "P.st", "P.tr", "R.st", "R.tr",
                "closest");
  out << buf;
  auto line = [&](const SimilarityRow& r) {
    std::snprintf(buf, sizeof buf, "%-16s %5d %8.2f %8.2f %8.2f %8.2f  %s\n", r.usage_id.c_str(), r.tests,
                  r.precision_states, r.precision_transitions, r.recall_states, r.recall_transitions,
                  r.closest_human.c_str());
    out << buf;
  };
  for (const auto& r : rows) line(r);
  if (auto avg = average_row(rows)) line(*avg);
  return out.str();
}

void write_report(const std::vector<SimilarityRow>& rows, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out || !(out << report_csv(rows))) throw Error(ErrorCode::IoError, "cannot write " + csv_path.string());
}

}  // namespace ugen
