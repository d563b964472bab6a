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

#include "ugen/app_script.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <sstream>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ugen/error.hpp"
#include "ugen/ir_model.hpp"
#include "ugen/process.hpp"

namespace ugen {

using nlohmann::json;

namespace {

constexpr std::pair<WidgetStyle, std::string_view> kStyles[] = {
    {WidgetStyle::Button, "button"}, {WidgetStyle::Outlined, "outlined"}, {WidgetStyle::Text, "text"},
    {WidgetStyle::Icon, "icon"},     {WidgetStyle::Field, "field"},       {WidgetStyle::Checkbox, "checkbox"},
    {WidgetStyle::ListItem, "list_item"},
};

constexpr std::pair<render::IconShape, std::string_view> kIcons[] = {
    {render::IconShape::Square, "square"},   {render::IconShape::Bars, "bars"}, {render::IconShape::Triangle, "triangle"},
    {render::IconShape::Diamond, "diamond"}, {render::IconShape::Plus, "plus"}, {render::IconShape::Cross, "cross"},
};

const render::Color kInk = render::rgb(20, 20, 20);

std::string_view icon_name(render::IconShape s) {
  for (auto [v, n] : kIcons)
    if (v == s) return n;
  return "square";
}

render::IconShape parse_icon(const std::string& s) {
  for (auto [v, n] : kIcons)
    if (n == s) return v;
  throw Error(ErrorCode::InvalidInput, "unknown icon: " + s);
}

json color_json(render::Color c) { return json::array({c[2], c[1], c[0]}); }

render::Color parse_color(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::InvalidInput, "colour must be [r,g,b]");
  return render::rgb(j[0].get<int>(), j[1].get<int>(), j[2].get<int>());
}

json box_json(const BoundingBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

BoundingBox parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::InvalidInput, "box must be [x,y,w,h]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

void draw_centered(cv::Mat& img, const BoundingBox& box, const std::string& text, int scale, render::Color color) {
  auto ext = render::text_extent({0, 0}, text, scale);
  Point origin{static_cast<int>(box.center_x() - ext.w / 2.0), static_cast<int>(box.center_y() - ext.h / 2.0)};
  render::draw_text(img, origin, text, scale, color);
}

void draw_widget(cv::Mat& img, const ScriptWidget& w) {
  const int glyph_h = render::kGlyphRows * w.text_scale;
  switch (w.style) {
    case WidgetStyle::Button:
      render::fill_rect(img, w.box, w.fill);
      draw_centered(img, w.box, w.text, w.text_scale, kInk);
      break;
    case WidgetStyle::Outlined:
      render::stroke_rect(img, w.box, kInk, 2);
      draw_centered(img, w.box, w.text, w.text_scale, kInk);
      break;
    case WidgetStyle::Text:
      render::draw_text(img, {w.box.x, w.box.y + (w.box.h - glyph_h) / 2}, w.text, w.text_scale, kInk);
      break;
    case WidgetStyle::Icon:
      render::draw_icon(img, w.box, w.icon, kInk);
      break;
    case WidgetStyle::Field:
      render::fill_rect(img, w.box, render::rgb(255, 255, 255));
      render::stroke_rect(img, w.box, render::rgb(110, 110, 110), 2);
      draw_centered(img, w.box, w.text, w.text_scale, render::rgb(90, 90, 90));
      break;
    case WidgetStyle::Checkbox: {
      const int side = std::min(24, w.box.h);
      render::stroke_rect(img, {w.box.x, w.box.y + (w.box.h - side) / 2, side, side}, kInk, 2);
      render::draw_text(img, {w.box.x + side + 12, w.box.y + (w.box.h - glyph_h) / 2}, w.text, w.text_scale, kInk);
      break;
    }
    case WidgetStyle::ListItem:
      render::fill_rect(img, w.box, render::rgb(255, 255, 255));
      render::stroke_rect(img, w.box, render::rgb(170, 170, 170), 2);
      draw_centered(img, w.box, w.text, w.text_scale, kInk);
      break;
  }
}

}  // namespace

std::string_view to_string(WidgetStyle style) {
  for (auto [v, n] : kStyles)
    if (v == style) return n;
  return "button";
}

WidgetStyle parse_widget_style(std::string_view text) {
  for (auto [v, n] : kStyles)
    if (n == text) return v;
  throw Error(ErrorCode::InvalidInput, "unknown widget style: " + std::string(text));
}

ClassType ScriptWidget::effective_class_type() const {
  if (class_type) return *class_type;
  switch (style) {
    case WidgetStyle::Button:
    case WidgetStyle::Outlined: return ClassType::Button;
    case WidgetStyle::Text: return ClassType::TextView;
    case WidgetStyle::Icon: return ClassType::ImageButton;
    case WidgetStyle::Field: return ClassType::EditText;
    case WidgetStyle::Checkbox: return ClassType::Checkbox;
    case WidgetStyle::ListItem: return ClassType::ListItem;
  }
  return ClassType::Other;
}

const ScriptWidget* ScriptScreen::widget(std::string_view widget_id) const {
  for (const auto& w : widgets)
    if (w.id == widget_id) return &w;
  return nullptr;
}

const ScriptScreen& AppScript::screen(std::string_view id) const {
  for (const auto& s : screens)
    if (s.id == id) return s;
  throw Error(ErrorCode::InvalidInput, "unknown screen: " + std::string(id));
}

bool AppScript::has_screen(std::string_view id) const {
  for (const auto& s : screens)
    if (s.id == id) return true;
  return false;
}

std::optional<std::string> AppScript::next(std::string_view from, const std::optional<std::string>& widget,
                                           ActionKind action) const {
  for (const auto& t : transitions)
    if (t.from == from && t.action == action && t.widget == widget) return t.to;
  return std::nullopt;
}

void AppScript::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); };
  if (!is_safe_identifier(app_id)) fail("app_id: invalid identifier '" + app_id + "'");
  if (width < 64 || height < 64) fail("width/height: too small");
  if (!has_screen(initial)) fail("initial: unknown screen '" + initial + "'");
  std::set<std::string> ids;
  for (const auto& s : screens) {
    if (!is_safe_identifier(s.id)) fail("screens: invalid id '" + s.id + "'");
    if (!ids.insert(s.id).second) fail("screens: duplicate id '" + s.id + "'");
    std::set<std::string> wids;
    for (const auto& w : s.widgets) {
      if (w.id.empty() || !wids.insert(w.id).second) fail("screens." + s.id + ".widgets: bad or duplicate id '" + w.id + "'");
      const BoundingBox full{0, 0, width, height};
      if (w.box.w <= 0 || w.box.h <= 0 || !full.contains(w.box)) fail("screens." + s.id + "." + w.id + ".box: outside screen");
      if (w.text_scale < 1) fail("screens." + s.id + "." + w.id + ".text_scale: must be >= 1");
    }
  }
  std::set<std::tuple<std::string, std::string, ActionKind>> keys;
  for (const auto& t : transitions) {
    if (!has_screen(t.from)) fail("transitions: unknown from screen '" + t.from + "'");
    if (!has_screen(t.to)) fail("transitions: unknown to screen '" + t.to + "'");
    if (is_swipe(t.action) == t.widget.has_value()) fail("transitions: widget must be set iff the action is not a swipe");
    if (t.widget && !screen(t.from).widget(*t.widget)) fail("transitions: unknown widget '" + *t.widget + "' on " + t.from);
    if (!keys.insert({t.from, t.widget.value_or(""), t.action}).second)
      fail("transitions: duplicate entry for " + t.from + " " + t.widget.value_or("-"));
  }
}

std::string AppScript::to_json() const {
  json doc;
  doc["app_id"] = app_id;
  doc["width"] = width;
  doc["height"] = height;
  doc["initial"] = initial;
  doc["screens"] = json::array();
  for (const auto& s : screens) {
    json js = {{"id", s.id}, {"label", s.label}, {"title", s.title}, {"background", color_json(s.background)},
               {"header", color_json(s.header)}, {"widgets", json::array()}};
    for (const auto& w : s.widgets) {
      json jw = {{"id", w.id}, {"style", to_string(w.style)}, {"box", box_json(w.box)}, {"text", w.text},
                 {"text_scale", w.text_scale}, {"fill", color_json(w.fill)}};
      if (w.style == WidgetStyle::Icon) jw["icon"] = icon_name(w.icon);
      if (w.class_type) jw["class_type"] = to_string(*w.class_type);
      if (w.parent_class) jw["parent_class"] = *w.parent_class;
      if (w.canonical) jw["canonical"] = *w.canonical;
      js["widgets"].push_back(std::move(jw));
    }
    doc["screens"].push_back(std::move(js));
  }
  doc["transitions"] = json::array();
  for (const auto& t : transitions) {
    json jt = {{"from", t.from}, {"action", to_string(t.action)}, {"to", t.to}};
    jt["widget"] = t.widget ? json(*t.widget) : json(nullptr);
    doc["transitions"].push_back(std::move(jt));
  }
  return doc.dump(1) + "\n";
}

AppScript AppScript::parse(const std::string& json_text) {
  AppScript app;
  try {
    json doc = json::parse(json_text);
    app.app_id = doc.at("app_id").get<std::string>();
    app.width = doc.value("width", 360);
    app.height = doc.value("height", 640);
    app.initial = doc.at("initial").get<std::string>();
    for (const auto& js : doc.at("screens")) {
      ScriptScreen s;
      s.id = js.at("id").get<std::string>();
      s.label = js.value("label", "");
      s.title = js.value("title", "");
      if (js.contains("background")) s.background = parse_color(js["background"]);
      if (js.contains("header")) s.header = parse_color(js["header"]);
      for (const auto& jw : js.value("widgets", json::array())) {
        ScriptWidget w;
        w.id = jw.at("id").get<std::string>();
        w.style = parse_widget_style(jw.value("style", "button"));
        w.box = parse_box(jw.at("box"));
        w.text = jw.value("text", "");
        w.text_scale = jw.value("text_scale", 2);
        if (jw.contains("fill")) w.fill = parse_color(jw["fill"]);
        if (jw.contains("icon")) w.icon = parse_icon(jw["icon"].get<std::string>());
        if (jw.contains("class_type")) w.class_type = parse_class_type(jw["class_type"].get<std::string>());
        if (jw.contains("parent_class") && !jw["parent_class"].is_null())
          w.parent_class = jw["parent_class"].get<std::string>();
        if (jw.contains("canonical") && !jw["canonical"].is_null()) w.canonical = jw["canonical"].get<std::string>();
        s.widgets.push_back(std::move(w));
      }
      app.screens.push_back(std::move(s));
    }
    for (const auto& jt : doc.value("transitions", json::array())) {
      ScriptTransition t;
      t.from = jt.at("from").get<std::string>();
      t.action = parse_action_kind(jt.value("action", "click"));
      t.to = jt.at("to").get<std::string>();
      if (jt.contains("widget") && !jt["widget"].is_null()) t.widget = jt["widget"].get<std::string>();
      app.transitions.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("app script: ") + e.what());
  }
  app.validate();
  return app;
}

AppScript AppScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void AppScript::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json();
}

cv::Mat render_screen(const AppScript& app, const ScriptScreen& screen) {
  cv::Mat img(app.height, app.width, CV_8UC3, cv::Scalar(screen.background[0], screen.background[1], screen.background[2]));
  render::fill_rect(img, {0, 0, app.width, 56}, screen.header);
  if (!screen.title.empty()) render::draw_text(img, {12, 21}, screen.title, 2, kInk);
  for (const auto& w : screen.widgets) draw_widget(img, w);
  return img;
}

const DeviceWidget* DeviceState::widget(std::string_view widget_id) const {
  for (const auto& w : widgets)
    if (w.id == widget_id) return &w;
  return nullptr;
}

ScriptedAdapter::ScriptedAdapter(AppScript app) : app_(std::move(app)) {
  app_.validate();
  current_ = app_.initial;
}

DeviceState ScriptedAdapter::current_state() {
  const auto& s = app_.screen(current_);
  auto it = cache_.find(current_);
  if (it == cache_.end()) it = cache_.emplace(current_, render_screen(app_, s)).first;
  DeviceState st;
  st.screen_id = current_;
  st.screenshot = it->second.clone();
  st.ui_tree.push_back({"FrameLayout", "", {0, 0, app_.width, app_.height}, -1});
  std::map<std::string, int> containers;
  for (const auto& w : s.widgets) {
    if (!w.parent_class || containers.count(*w.parent_class)) continue;
    BoundingBox b = w.box;
    for (const auto& o : s.widgets)
      if (o.parent_class == w.parent_class) b = b.united(o.box);
    containers[*w.parent_class] = static_cast<int>(st.ui_tree.size());
    st.ui_tree.push_back({*w.parent_class, "", b, 0});
  }
  for (const auto& w : s.widgets) {
    int parent = w.parent_class ? containers[*w.parent_class] : 0;
    st.ui_tree.push_back({std::string(to_string(w.effective_class_type())), w.text, w.box, parent});
    DeviceWidget dw;
    dw.id = w.id;
    dw.widget.element.box = w.box;
    const bool textual = w.style == WidgetStyle::Text;
    dw.widget.element.kind = textual ? ElementKind::Textual : ElementKind::Visual;
    dw.widget.element.text = w.text;
    dw.widget.element.crop = st.screenshot(cv::Rect(w.box.x, w.box.y, w.box.w, w.box.h)).clone();
    dw.widget.class_type = w.effective_class_type();
    dw.widget.parent_class = w.parent_class;
    dw.widget.zone = zone_of(w.box, app_.width, app_.height);
    st.widgets.push_back(std::move(dw));
  }
  return st;
}

void ScriptedAdapter::execute(const DeviceEvent& event) {
  std::optional<std::string> widget;
  if (!is_swipe(event.action)) {
    const auto* w = app_.screen(current_).widget(event.widget_id);
    if (!w) throw Error(ErrorCode::AdapterError, "no widget '" + event.widget_id + "' on screen " + current_);
    if (event.text && w->accepts_text()) typed_[current_ + "/" + w->id] = *event.text;
    widget = event.widget_id;
  }
  if (auto to = app_.next(current_, widget, event.action)) current_ = *to;
}

DeviceState ScriptedAdapter::reset() {
  current_ = app_.initial;
  typed_.clear();
  return current_state();
}

namespace {

DeviceState state_from_json(const json& j) {
  DeviceState st;
  st.screen_id = j.value("screen_id", "");
  auto path = j.at("screenshot").get<std::string>();
  st.screenshot = cv::imread(path, cv::IMREAD_COLOR);
  if (st.screenshot.empty()) throw Error(ErrorCode::AdapterError, "unreadable screenshot " + path);
  const BoundingBox full{0, 0, st.screenshot.cols, st.screenshot.rows};
  for (const auto& jn : j.value("ui_tree", json::array()))
    st.ui_tree.push_back({jn.at("class").get<std::string>(), jn.value("text", ""), parse_box(jn.at("bounds")),
                          jn.value("parent", -1)});
  for (const auto& jw : j.value("widgets", json::array())) {
    DeviceWidget dw;
    dw.id = jw.at("id").get<std::string>();
    auto& e = dw.widget.element;
    e.box = parse_box(jw.at("box"));
    if (!full.contains(e.box) || e.box.w <= 0 || e.box.h <= 0)
      throw Error(ErrorCode::AdapterError, "widget box outside screenshot: " + dw.id);
    e.kind = jw.value("kind", "visual") == "textual" ? ElementKind::Textual : ElementKind::Visual;
    e.text = jw.value("text", "");
    e.crop = st.screenshot(cv::Rect(e.box.x, e.box.y, e.box.w, e.box.h)).clone();
    dw.widget.class_type = parse_class_type(jw.value("class_type", "Other"));
    if (jw.contains("parent_class") && !jw["parent_class"].is_null())
      dw.widget.parent_class = jw["parent_class"].get<std::string>();
    dw.widget.zone = zone_of(e.box, st.screenshot.cols, st.screenshot.rows);
    st.widgets.push_back(std::move(dw));
  }
  return st;
}

}  // namespace

std::string device_state_json(const DeviceState& state, const std::filesystem::path& screenshot_path) {
  if (!cv::imwrite(screenshot_path.string(), state.screenshot))
    throw Error(ErrorCode::IoError, "cannot write " + screenshot_path.string());
  json j = {{"ok", true}, {"screen_id", state.screen_id}, {"screenshot", screenshot_path.string()}};
  j["ui_tree"] = json::array();
  for (const auto& n : state.ui_tree)
    j["ui_tree"].push_back({{"class", n.class_name}, {"text", n.text}, {"bounds", box_json(n.bounds)}, {"parent", n.parent}});
  j["widgets"] = json::array();
  for (const auto& w : state.widgets) {
    json jw = {{"id", w.id},
               {"box", box_json(w.widget.element.box)},
               {"kind", w.widget.element.kind == ElementKind::Textual ? "textual" : "visual"},
               {"text", w.widget.element.text},
               {"class_type", to_string(w.widget.class_type)}};
    jw["parent_class"] = w.widget.parent_class ? json(*w.widget.parent_class) : json(nullptr);
    j["widgets"].push_back(std::move(jw));
  }
  return j.dump();
}

void serve_adapter_protocol(DeviceAdapter& adapter, std::istream& in, std::ostream& out,
                            const std::filesystem::path& scratch_dir) {
  std::filesystem::create_directories(scratch_dir);
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string reply;
    try {
      json req = json::parse(line);
      std::string op = req.at("op").get<std::string>();
      auto shot = scratch_dir / ("state_" + std::to_string(n++ % 4) + ".png");
      if (op == "reset") {
        reply = device_state_json(adapter.reset(), shot);
      } else if (op == "current_state") {
        reply = device_state_json(adapter.current_state(), shot);
      } else if (op == "execute") {
        DeviceEvent ev;
        ev.widget_id = req.value("widget_id", "");
        ev.action = parse_action_kind(req.value("action", "click"));
        if (req.contains("text") && !req["text"].is_null()) ev.text = req["text"].get<std::string>();
        adapter.execute(ev);
        reply = json({{"ok", true}}).dump();
      } else {
        throw Error(ErrorCode::InvalidInput, "unknown op " + op);
      }
    } catch (const std::exception& e) {
      reply = json({{"ok", false}, {"error", e.what()}}).dump();
    }
    out << reply << '\n' << std::flush;
  }
}

struct ProcessAdapter::Impl {
  explicit Impl(const std::string& cmd) : child(cmd) {}
  ChildProcess child;

  json call(const json& req) {
    child.write_line(req.dump());
    json reply;
    try {
      reply = json::parse(child.read_line());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::AdapterError, std::string("adapter reply: ") + e.what());
    }
    if (!reply.value("ok", false)) throw Error(ErrorCode::AdapterError, reply.value("error", "adapter failure"));
    return reply;
  }

  DeviceState state(const json& req) {
    auto reply = call(req);
    try {
      return state_from_json(reply);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::AdapterError, std::string("adapter state: ") + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::AdapterError) throw;
      throw Error(ErrorCode::AdapterError, e.what());
    }
  }
};

ProcessAdapter::ProcessAdapter(std::string command) : impl_(std::make_unique<Impl>(command)) {}
ProcessAdapter::~ProcessAdapter() = default;

DeviceState ProcessAdapter::current_state() { return impl_->state({{"op", "current_state"}}); }

DeviceState ProcessAdapter::reset() { return impl_->state({{"op", "reset"}}); }

void ProcessAdapter::execute(const DeviceEvent& event) {
  json req = {{"op", "execute"}, {"widget_id", event.widget_id}, {"action", to_string(event.action)}};
  req["text"] = event.text ? json(*event.text) : json(nullptr);
  impl_->call(req);
}

}  // namespace ugen
