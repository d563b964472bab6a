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

// Deterministic drawing primitives shared by the fixture generator, the
// scripted device adapter and the built-in glyph text extractor.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <opencv2/core.hpp>

#include "ugen/geometry.hpp"

namespace ugen::render {

/// 8-bit BGR colour, the layout of a CV_8UC3 pixel.
using Color = cv::Vec3b;

inline Color rgb(int r, int g, int b) {
  return Color(static_cast<uchar>(b), static_cast<uchar>(g), static_cast<uchar>(r));
}

inline constexpr int kGlyphCols = 5;
inline constexpr int kGlyphRows = 7;

/// Rows of a 5x7 glyph, bit 4 is the leftmost column.
using GlyphBits = std::array<std::uint8_t, kGlyphRows>;

/// Glyph for `c` (lowercase letters map to uppercase). Space yields an empty
/// glyph; characters outside the font yield nullopt.
std::optional<GlyphBits> glyph(char c);

/// Inverse lookup used by the text extractor.
std::optional<char> glyph_char(const GlyphBits& bits);

inline int glyph_advance(int scale) { return (kGlyphCols + 1) * scale; }

/// Box occupied by `text` drawn at `origin` (cell top-left) with `scale`.
BoundingBox text_extent(Point origin, std::string_view text, int scale);

/// Draws `text` with no anti-aliasing; each font pixel is a scale x scale block.
void draw_text(cv::Mat& image, Point origin, std::string_view text, int scale, Color color);

void fill_rect(cv::Mat& image, const BoundingBox& box, Color color);
void stroke_rect(cv::Mat& image, const BoundingBox& box, Color color, int thickness);

enum class IconShape { Square, Bars, Triangle, Diamond, Plus, Cross };

/// Draws a flat icon glyph inside `box`.
void draw_icon(cv::Mat& image, const BoundingBox& box, IconShape shape, Color color);

/// The OS touch indicator: a filled disk with a darker rim.
struct IndicatorStyle {
  int radius = 20;
  int rim_width = 3;
  Color fill = rgb(235, 235, 235);
  Color rim = rgb(70, 70, 70);
};

/// Alpha-blends the indicator centred at `center` with the given opacity.
void draw_indicator(cv::Mat& image, Point center, double opacity, const IndicatorStyle& style);

/// Template of side 2*(radius+margin)+1 rendered over a flat background.
cv::Mat indicator_template(const IndicatorStyle& style, double opacity, Color background, int margin);

/// Soft keyboard occupying the bottom `region_fraction` of the image.
struct KeyboardStyle {
  Color panel = rgb(206, 210, 214);
  Color key = rgb(252, 252, 252);
  Color label = rgb(30, 30, 30);
};

void draw_keyboard(cv::Mat& image, double region_fraction, const KeyboardStyle& style);

/// Centre of the key for `c` on a keyboard drawn by draw_keyboard. Characters
/// without a key map to the space bar.
Point keyboard_key_center(char c, int width, int height, double region_fraction);

}  // namespace ugen::render
