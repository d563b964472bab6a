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

#include "ugen/render.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <vector>

#include <opencv2/imgproc.hpp>

namespace ugen::render {
namespace {

const std::map<char, GlyphBits>& font() {
  static const std::map<char, GlyphBits> table = {
      {' ', {0, 0, 0, 0, 0, 0, 0}},
      {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
      {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
      {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
      {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
      {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
      {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
      {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
      {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
      {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
      {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
      {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
      {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
      {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
      {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
      {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
      {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
      {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
      {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
      {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
      {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
      {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
      {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
      {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
      {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
      {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
      {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
      {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
      {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
      {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
      {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
      {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
      {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
      {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
      {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
      {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
      {'@', {0x0E, 0x11, 0x01, 0x0D, 0x15, 0x15, 0x0E}},
      {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
      {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
      {'!', {0x04, 0x04, 0x04, 0x04, 0x04, 0x00, 0x04}},
      {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
      {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
      {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
      {'&', {0x0C, 0x12, 0x14, 0x08, 0x15, 0x12, 0x0D}},
      {'\'', {0x0C, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00}},
      {'*', {0x00, 0x04, 0x15, 0x0E, 0x15, 0x04, 0x00}},
      {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
      {'$', {0x04, 0x0F, 0x14, 0x0E, 0x05, 0x1E, 0x04}},
  };
  return table;
}

const std::map<GlyphBits, char>& reverse_font() {
  static const std::map<GlyphBits, char> table = [] {
    std::map<GlyphBits, char> out;
    for (const auto& [c, bits] : font()) out.emplace(bits, c);
    return out;
  }();
  return table;
}

void blend(cv::Vec3b& px, Color c, double alpha) {
  for (int k = 0; k < 3; ++k) {
    px[k] = static_cast<uchar>(std::lround((1.0 - alpha) * px[k] + alpha * c[k]));
  }
}

}  // namespace

std::optional<GlyphBits> glyph(char c) {
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  auto it = font().find(up);
  if (it == font().end()) return std::nullopt;
  return it->second;
}

std::optional<char> glyph_char(const GlyphBits& bits) {
  auto it = reverse_font().find(bits);
  if (it == reverse_font().end()) return std::nullopt;
  return it->second;
}

BoundingBox text_extent(Point origin, std::string_view text, int scale) {
  int n = static_cast<int>(text.size());
  int width = n == 0 ? 0 : n * glyph_advance(scale) - scale;
  return {origin.x, origin.y, width, kGlyphRows * scale};
}

void draw_text(cv::Mat& image, Point origin, std::string_view text, int scale, Color color) {
  int cx = origin.x;
  for (char c : text) {
    auto bits = glyph(c);
    if (bits) {
      for (int row = 0; row < kGlyphRows; ++row) {
        for (int col = 0; col < kGlyphCols; ++col) {
          if (!((*bits)[row] & (0x10 >> col))) continue;
          fill_rect(image, {cx + col * scale, origin.y + row * scale, scale, scale}, color);
        }
      }
    }
    cx += glyph_advance(scale);
  }
}

void fill_rect(cv::Mat& image, const BoundingBox& box, Color color) {
  cv::Rect r = cv::Rect(box.x, box.y, box.w, box.h) & cv::Rect(0, 0, image.cols, image.rows);
  if (r.area() > 0) image(r).setTo(cv::Scalar(color[0], color[1], color[2]));
}

void stroke_rect(cv::Mat& image, const BoundingBox& box, Color color, int thickness) {
  fill_rect(image, {box.x, box.y, box.w, thickness}, color);
  fill_rect(image, {box.x, box.bottom() - thickness, box.w, thickness}, color);
  fill_rect(image, {box.x, box.y, thickness, box.h}, color);
  fill_rect(image, {box.right() - thickness, box.y, thickness, box.h}, color);
}

void draw_icon(cv::Mat& image, const BoundingBox& box, IconShape shape, Color color) {
  cv::Scalar s(color[0], color[1], color[2]);
  int x = box.x, y = box.y, w = box.w, h = box.h;
  switch (shape) {
    case IconShape::Square:
      fill_rect(image, {x + w / 6, y + h / 6, w - 2 * (w / 6), h - 2 * (h / 6)}, color);
      break;
    case IconShape::Bars: {
      int bar = std::max(2, h / 7);
      for (int i = 0; i < 3; ++i) fill_rect(image, {x, y + h / 6 + i * (2 * h / 7), w, bar}, color);
      break;
    }
    case IconShape::Triangle: {
      std::vector<cv::Point> pts = {{x + w / 2, y}, {x + w - 1, y + h - 1}, {x, y + h - 1}};
      cv::fillConvexPoly(image, pts, s, cv::LINE_8);
      break;
    }
    case IconShape::Diamond: {
      std::vector<cv::Point> pts = {{x + w / 2, y}, {x + w - 1, y + h / 2}, {x + w / 2, y + h - 1}, {x, y + h / 2}};
      cv::fillConvexPoly(image, pts, s, cv::LINE_8);
      break;
    }
    case IconShape::Plus: {
      int t = std::max(3, w / 4);
      fill_rect(image, {x + (w - t) / 2, y, t, h}, color);
      fill_rect(image, {x, y + (h - t) / 2, w, t}, color);
      break;
    }
    case IconShape::Cross: {
      int t = std::max(3, w / 5);
      cv::line(image, {x, y}, {x + w - 1, y + h - 1}, s, t, cv::LINE_8);
      cv::line(image, {x + w - 1, y}, {x, y + h - 1}, s, t, cv::LINE_8);
      break;
    }
  }
}

void draw_indicator(cv::Mat& image, Point center, double opacity, const IndicatorStyle& style) {
  const int r = style.radius;
  const int inner2 = (r - style.rim_width) * (r - style.rim_width);
  for (int dy = -r; dy <= r; ++dy) {
    int y = center.y + dy;
    if (y < 0 || y >= image.rows) continue;
    for (int dx = -r; dx <= r; ++dx) {
      int x = center.x + dx;
      if (x < 0 || x >= image.cols) continue;
      int d2 = dx * dx + dy * dy;
      if (d2 > r * r) continue;
      blend(image.at<cv::Vec3b>(y, x), d2 > inner2 ? style.rim : style.fill, opacity);
    }
  }
}

cv::Mat indicator_template(const IndicatorStyle& style, double opacity, Color background, int margin) {
  int side = 2 * (style.radius + margin) + 1;
  cv::Mat out(side, side, CV_8UC3, cv::Scalar(background[0], background[1], background[2]));
  draw_indicator(out, {side / 2, side / 2}, opacity, style);
  return out;
}

namespace {

constexpr std::array<std::string_view, 3> kKeyRows = {"QWERTYUIOP", "ASDFGHJKL", "ZXCVBNM"};

struct KeyGeometry {
  int top;
  int row_h;
  double key_w;
};

KeyGeometry key_geometry(int width, int height, double fraction) {
  int region = static_cast<int>(std::lround(fraction * height));
  return {height - region, region / 4, width / 10.0};
}

BoundingBox key_box(const KeyGeometry& g, int row, double col) {
  double offset = row == 1 ? 0.5 : row == 2 ? 1.5 : 0.0;
  int x = static_cast<int>(std::lround((offset + col) * g.key_w));
  int x2 = static_cast<int>(std::lround((offset + col + 1) * g.key_w));
  return {x + 3, g.top + row * g.row_h + 4, x2 - x - 6, g.row_h - 8};
}

}  // namespace

void draw_keyboard(cv::Mat& image, double region_fraction, const KeyboardStyle& style) {
  KeyGeometry g = key_geometry(image.cols, image.rows, region_fraction);
  fill_rect(image, {0, g.top, image.cols, image.rows - g.top}, style.panel);
  for (int row = 0; row < 3; ++row) {
    for (std::size_t col = 0; col < kKeyRows[row].size(); ++col) {
      BoundingBox k = key_box(g, row, static_cast<double>(col));
      fill_rect(image, k, style.key);
      std::string label(1, kKeyRows[row][col]);
      BoundingBox t = text_extent({0, 0}, label, 2);
      draw_text(image, {k.x + (k.w - t.w) / 2, k.y + (k.h - t.h) / 2}, label, 2, style.label);
    }
  }
  BoundingBox space = key_box(g, 3, 2.5);
  space.w = static_cast<int>(std::lround(5 * g.key_w)) - 6;
  fill_rect(image, space, style.key);
  // shift and backspace keys
  fill_rect(image, key_box(g, 2, -1.5), style.key);
  fill_rect(image, key_box(g, 2, 7.0), style.key);
}

Point keyboard_key_center(char c, int width, int height, double region_fraction) {
  KeyGeometry g = key_geometry(width, height, region_fraction);
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (int row = 0; row < 3; ++row) {
    auto pos = kKeyRows[row].find(up);
    if (pos != std::string_view::npos) {
      BoundingBox k = key_box(g, row, static_cast<double>(pos));
      return {k.x + k.w / 2, k.y + k.h / 2};
    }
  }
  BoundingBox space = key_box(g, 3, 2.5);
  space.w = static_cast<int>(std::lround(5 * g.key_w)) - 6;
  return {space.x + space.w / 2, space.y + space.h / 2};
}

}  // namespace ugen::render
