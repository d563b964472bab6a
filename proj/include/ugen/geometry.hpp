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

#include <algorithm>
#include <cmath>
#include <compare>

namespace ugen {

/// Pixel position in screen coordinates; y grows downward.
struct Point {
  int x = 0;
  int y = 0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

/// Axis-aligned box, top-left origin. Covers x in [x, x+w) and y in [y, y+h).
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  long area() const { return static_cast<long>(w) * h; }

  bool covers(Point p) const { return p.x >= x && p.x < right() && p.y >= y && p.y < bottom(); }

  bool contains(const BoundingBox& o) const {
    return x <= o.x && y <= o.y && right() >= o.right() && bottom() >= o.bottom();
  }

  BoundingBox expanded(int by) const { return {x - by, y - by, w + 2 * by, h + 2 * by}; }

  BoundingBox united(const BoundingBox& o) const {
    int nx = std::min(x, o.x), ny = std::min(y, o.y);
    return {nx, ny, std::max(right(), o.right()) - nx, std::max(bottom(), o.bottom()) - ny};
  }

  /// Clamp into a W x H screen. Keeps w,h >= 1.
  BoundingBox clamped(int width, int height) const {
    int nx = std::clamp(x, 0, width - 1), ny = std::clamp(y, 0, height - 1);
    int nr = std::clamp(right(), nx + 1, width), nb = std::clamp(bottom(), ny + 1, height);
    return {nx, ny, nr - nx, nb - ny};
  }

  /// Vertical overlap in pixels (0 when disjoint).
  int vertical_overlap(const BoundingBox& o) const {
    return std::max(0, std::min(bottom(), o.bottom()) - std::max(y, o.y));
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double center_distance(const BoundingBox& box, Point p) {
  return std::hypot(box.center_x() - p.x, box.center_y() - p.y);
}

inline double center_distance(const BoundingBox& a, const BoundingBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

}  // namespace ugen
