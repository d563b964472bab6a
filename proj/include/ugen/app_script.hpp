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

// Simulated target apps: a screen/widget/transition table rendered with the
// shared drawing primitives, and the device adapters that drive an app.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/action.hpp"
#include "ugen/gui.hpp"
#include "ugen/render.hpp"

namespace ugen {

enum class WidgetStyle { Button, Outlined, Text, Icon, Field, Checkbox, ListItem };

std::string_view to_string(WidgetStyle style);
WidgetStyle parse_widget_style(std::string_view text);

struct ScriptWidget {
  std::string id;
  WidgetStyle style = WidgetStyle::Button;
  BoundingBox box;
  std::string text;
  render::IconShape icon = render::IconShape::Square;
  int text_scale = 2;
  render::Color fill = render::rgb(210, 225, 245);
  std::optional<ClassType> class_type;  ///< default follows the style
  std::optional<std::string> parent_class;
  std::optional<std::string> canonical;  ///< ground-truth widget category

  ClassType effective_class_type() const;
  bool accepts_text() const { return effective_class_type() == ClassType::EditText; }
};

struct ScriptScreen {
  std::string id;
  std::string label;  ///< ground-truth canonical screen category
  std::string title;
  render::Color background = render::rgb(248, 248, 248);
  render::Color header = render::rgb(225, 232, 240);
  std::vector<ScriptWidget> widgets;

  const ScriptWidget* widget(std::string_view widget_id) const;
};

struct ScriptTransition {
  std::string from;
  std::optional<std::string> widget;  ///< absent for swipes
  ActionKind action = ActionKind::Click;
  std::string to;
};

struct AppScript {
  std::string app_id;
  int width = 360;
  int height = 640;
  std::string initial;
  std::vector<ScriptScreen> screens;
  std::vector<ScriptTransition> transitions;

  const ScriptScreen& screen(std::string_view id) const;  ///< throws Error(InvalidInput)
  bool has_screen(std::string_view id) const;
  /// Destination of (screen, widget, action), nullopt when undefined.
  std::optional<std::string> next(std::string_view screen, const std::optional<std::string>& widget,
                                  ActionKind action) const;

  /// Throws Error(InvalidInput) naming the offending field.
  void validate() const;

  std::string to_json() const;
  static AppScript parse(const std::string& json_text);
  static AppScript load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Draws the screen exactly as the fixture recordings and adapters show it.
cv::Mat render_screen(const AppScript& app, const ScriptScreen& screen);

/// One node of the runtime UI hierarchy.
struct UiNode {
  std::string class_name;
  std::string text;
  BoundingBox bounds;
  int parent = -1;  ///< index into the node list, -1 for the root
};

struct DeviceWidget {
  std::string id;
  Widget widget;
};

struct DeviceState {
  std::string screen_id;  ///< adapter-specific screen identity
  cv::Mat screenshot;
  std::vector<UiNode> ui_tree;
  std::vector<DeviceWidget> widgets;

  const DeviceWidget* widget(std::string_view widget_id) const;
};

struct DeviceEvent {
  std::string widget_id;  ///< empty for swipes
  ActionKind action = ActionKind::Click;
  std::optional<std::string> text;
};

class DeviceAdapter {
 public:
  virtual ~DeviceAdapter() = default;
  virtual DeviceState current_state() = 0;
  virtual void execute(const DeviceEvent& event) = 0;
  virtual DeviceState reset() = 0;
};

/// In-process adapter over an AppScript. Undefined (widget, action) pairs keep
/// the current screen.
class ScriptedAdapter final : public DeviceAdapter {
 public:
  explicit ScriptedAdapter(AppScript app);

  DeviceState current_state() override;
  void execute(const DeviceEvent& event) override;
  DeviceState reset() override;

  const AppScript& app() const { return app_; }
  const std::string& screen_id() const { return current_; }
  const std::map<std::string, std::string>& typed_text() const { return typed_; }

 private:
  AppScript app_;
  std::string current_;
  std::map<std::string, std::string> typed_;
  std::map<std::string, cv::Mat> cache_;
};

/// Adapter speaking newline-delimited JSON with a child process. Requests:
/// {"op":"reset"|"current_state"} and {"op":"execute","widget_id","action","text"}.
/// Replies: {"ok":true,"screen_id","screenshot":<png path>,"widgets":[...],"ui_tree":[...]}
/// or {"ok":false,"error":...}. Failures raise Error(AdapterError).
class ProcessAdapter final : public DeviceAdapter {
 public:
  explicit ProcessAdapter(std::string command);
  ~ProcessAdapter() override;

  DeviceState current_state() override;
  void execute(const DeviceEvent& event) override;
  DeviceState reset() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// JSON form of a device state used by the adapter protocol; the screenshot is
/// written to `screenshot_path`.
std::string device_state_json(const DeviceState& state, const std::filesystem::path& screenshot_path);

/// Serves the ProcessAdapter protocol for `adapter` over the given streams
/// until EOF. Screenshots are written under `scratch_dir`.
void serve_adapter_protocol(DeviceAdapter& adapter, std::istream& in, std::ostream& out,
                            const std::filesystem::path& scratch_dir);

}  // namespace ugen
