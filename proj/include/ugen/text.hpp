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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/geometry.hpp"

namespace ugen {

/// One recognised word and its box on the screen.
struct WordBox {
  BoundingBox box;
  std::string text;

  friend bool operator==(const WordBox&, const WordBox&) = default;
};

/// Source of on-screen text. Implementations throw Error(TextExtractionError)
/// when the underlying engine fails.
class TextExtraction {
 public:
  virtual ~TextExtraction() = default;
  virtual std::vector<WordBox> extract(const cv::Mat& screen) const = 0;
};

/// Reads text drawn with the built-in 5x7 bitmap font by matching glyph cells
/// exactly. Expects dark text on lighter backgrounds.
class GlyphTextExtractor final : public TextExtraction {
 public:
  explicit GlyphTextExtractor(std::vector<int> scales = {2, 3}, int ink_threshold = 96)
      : scales_(std::move(scales)), ink_threshold_(ink_threshold) {}

  std::vector<WordBox> extract(const cv::Mat& screen) const override;

 private:
  std::vector<int> scales_;
  int ink_threshold_;
};

/// Runs `command <png-path>` and parses one `x y w h text...` record per line
/// from its standard output.
class CommandTextExtractor final : public TextExtraction {
 public:
  explicit CommandTextExtractor(std::string command) : command_(std::move(command)) {}

  std::vector<WordBox> extract(const cv::Mat& screen) const override;

 private:
  std::string command_;
};

/// Lowercase and split on non-alphanumerics; empty pieces are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Light suffix stripping used for term correlation.
std::string stem(std::string_view token);

std::uint64_t fnv1a64(std::string_view bytes);

/// Words joined with single spaces in reading order.
std::string join_words(const std::vector<WordBox>& words);

}  // namespace ugen
