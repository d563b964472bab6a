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

#include <string>
#include <string_view>

#include "ugen/geometry.hpp"

namespace ugen {

enum class ActionKind { Click, LongTap, SwipeUp, SwipeDown, SwipeLeft, SwipeRight };

inline bool is_swipe(ActionKind k) { return k != ActionKind::Click && k != ActionKind::LongTap; }

std::string_view to_string(ActionKind kind);
/// Accepts the names produced by to_string; throws Error(InvalidInput).
ActionKind parse_action_kind(std::string_view text);

struct UserAction {
  ActionKind kind = ActionKind::Click;
  Point start;
  Point end;
  int duration_frames = 1;

  friend bool operator==(const UserAction&, const UserAction&) = default;
};

}  // namespace ugen
