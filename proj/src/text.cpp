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

#include "ugen/text.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <map>
#include <sstream>

#include <unistd.h>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ugen/error.hpp"
#include "ugen/process.hpp"
#include "ugen/render.hpp"

namespace ugen {
namespace {

enum class Cell { Invalid, Empty, Glyph };

struct CellResult {
  Cell kind = Cell::Invalid;
  char c = ' ';
};

// Decodes the glyph cell whose top-left is (x, y). Every font pixel must be a
// uniform s x s block and the spacing column to the right must be clear.
CellResult decode_cell(const cv::Mat& ink, int x, int y, int s) {
  const int cw = render::kGlyphCols * s, ch = render::kGlyphRows * s;
  if (x < 0 || y < 0 || x + cw > ink.cols || y + ch > ink.rows) return {};
  render::GlyphBits bits{};
  bool any = false;
  for (int row = 0; row < render::kGlyphRows; ++row) {
    for (int col = 0; col < render::kGlyphCols; ++col) {
      const uchar first = ink.at<uchar>(y + row * s, x + col * s);
      for (int dy = 0; dy < s; ++dy) {
        const uchar* p = ink.ptr<uchar>(y + row * s + dy) + x + col * s;
        for (int dx = 0; dx < s; ++dx) {
          if (p[dx] != first) return {};
        }
      }
      if (first) {
        bits[row] |= static_cast<std::uint8_t>(0x10 >> col);
        any = true;
      }
    }
  }
  if (x + cw + s <= ink.cols) {
    for (int dy = 0; dy < ch; ++dy) {
      const uchar* p = ink.ptr<uchar>(y + dy) + x + cw;
      for (int dx = 0; dx < s; ++dx) {
        if (p[dx]) return {};
      }
    }
  }
  if (!any) return {Cell::Empty, ' '};
  auto c = render::glyph_char(bits);
  if (!c) return {};
  return {Cell::Glyph, *c};
}

struct Run {
  int origin_x = 0;
  std::string text;
};

// Decodes forward from the anchor cell. Stops at two consecutive empty cells
// or at an undecodable cell.
Run decode_run(const cv::Mat& ink, int origin_x, int top, int s) {
  const int adv = render::glyph_advance(s);
  Run run;
  int start = origin_x;
  // Extend leftwards over punctuation and letters directly adjacent to the anchor.
  for (;;) {
    CellResult prev = decode_cell(ink, start - adv, top, s);
    if (prev.kind != Cell::Glyph) break;
    start -= adv;
  }
  run.origin_x = start;
  int empties = 0;
  for (int x = start;; x += adv) {
    CellResult cell = decode_cell(ink, x, top, s);
    if (cell.kind == Cell::Invalid) break;
    if (cell.kind == Cell::Empty) {
      if (++empties >= 2) break;
      run.text.push_back(' ');
      continue;
    }
    empties = 0;
    run.text.push_back(cell.c);
  }
  while (!run.text.empty() && run.text.back() == ' ') run.text.pop_back();
  return run;
}

int count_alnum(const std::string& s) {
  return static_cast<int>(std::count_if(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c); }));
}

}  // namespace

std::vector<WordBox> GlyphTextExtractor::extract(const cv::Mat& screen) const {
  if (screen.empty()) return {};
  cv::Mat gray, ink;
  if (screen.channels() == 3) cv::cvtColor(screen, gray, cv::COLOR_BGR2GRAY);
  else gray = screen;
  cv::threshold(gray, ink, ink_threshold_ - 1, 255, cv::THRESH_BINARY_INV);

  cv::Mat labels, stats, centroids;
  int n = cv::connectedComponentsWithStats(ink, labels, stats, centroids, 8, CV_32S);

  std::vector<WordBox> words;
  for (int s : scales_) {
    const int cw = render::kGlyphCols * s, ch = render::kGlyphRows * s;
    const int adv = render::glyph_advance(s);
    std::vector<std::pair<int, int>> anchors;  // (top, left)
    for (int i = 1; i < n; ++i) {
      int w = stats.at<int>(i, cv::CC_STAT_WIDTH), h = stats.at<int>(i, cv::CC_STAT_HEIGHT);
      if (h == ch && w <= cw && w >= s) {
        anchors.emplace_back(stats.at<int>(i, cv::CC_STAT_TOP), stats.at<int>(i, cv::CC_STAT_LEFT));
      }
    }
    std::sort(anchors.begin(), anchors.end());
    std::vector<std::pair<int, int>> consumed;  // (top, right edge of decoded run)
    for (auto [top, left] : anchors) {
      bool covered = std::any_of(consumed.begin(), consumed.end(), [&](const auto& c) {
        return c.first == top && left < c.second;
      });
      if (covered) continue;
      // The anchor's leftmost ink column may sit up to four font columns into its cell.
      Run best;
      for (int k = 0; k < render::kGlyphCols; ++k) {
        CellResult cell = decode_cell(ink, left - k * s, top, s);
        if (cell.kind != Cell::Glyph) continue;
        Run run = decode_run(ink, left - k * s, top, s);
        if (count_alnum(run.text) > count_alnum(best.text)) best = run;
      }
      if (count_alnum(best.text) == 0) continue;
      consumed.emplace_back(top, best.origin_x + static_cast<int>(best.text.size()) * adv);
      // Split into words.
      std::size_t i = 0;
      while (i < best.text.size()) {
        if (best.text[i] == ' ') {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < best.text.size() && best.text[j] != ' ') ++j;
        std::string word = best.text.substr(i, j - i);
        Point origin{best.origin_x + static_cast<int>(i) * adv, top};
        words.push_back({render::text_extent(origin, word, s), word});
        i = j;
      }
    }
  }
  std::sort(words.begin(), words.end(), [](const WordBox& a, const WordBox& b) {
    return std::tie(a.box.y, a.box.x) < std::tie(b.box.y, b.box.x);
  });
  return words;
}

std::vector<WordBox> CommandTextExtractor::extract(const cv::Mat& screen) const {
  static std::atomic<int> counter{0};
  auto path = std::filesystem::temp_directory_path() /
              ("ugen_ocr_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".png");
  if (!cv::imwrite(path.string(), screen)) throw Error(ErrorCode::TextExtractionError, "cannot write " + path.string());
  std::string out;
  try {
    out = run_command(command_ + " " + shell_quote(path.string()));
  } catch (const Error& e) {
    std::filesystem::remove(path);
    throw Error(ErrorCode::TextExtractionError, e.what());
  }
  std::filesystem::remove(path);
  std::vector<WordBox> words;
  std::istringstream lines(out);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream rec(line);
    WordBox word;
    if (!(rec >> word.box.x >> word.box.y >> word.box.w >> word.box.h)) {
      throw Error(ErrorCode::TextExtractionError, "malformed record on line " + std::to_string(lineno) + ": " + line);
    }
    std::getline(rec >> std::ws, word.text);
    if (word.text.empty() || word.box.w <= 0 || word.box.h <= 0) continue;
    words.push_back(std::move(word));
  }
  return words;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string stem(std::string_view token) {
  std::string t(token);
  auto ends = [&](std::string_view suf) { return t.size() > suf.size() && t.ends_with(suf); };
  if (t.size() > 5 && ends("ing")) t.resize(t.size() - 3);
  else if (t.size() > 4 && ends("ed")) t.resize(t.size() - 2);
  else if (t.size() > 4 && ends("ies")) t = t.substr(0, t.size() - 3) + "y";
  else if (t.size() > 3 && ends("s") && !ends("ss")) t.pop_back();
  return t;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string join_words(const std::vector<WordBox>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w.text;
  }
  return out;
}

}  // namespace ugen
