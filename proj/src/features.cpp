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

#include "ugen/features.hpp"

#include <cmath>

#include <opencv2/imgproc.hpp>

#include "ugen/error.hpp"

namespace ugen {

namespace {

void l2_normalize(std::vector<double>::iterator first, std::vector<double>::iterator last) {
  double s = 0;
  for (auto it = first; it != last; ++it) s += *it * *it;
  if (s <= 0) return;
  s = std::sqrt(s);
  for (auto it = first; it != last; ++it) *it /= s;
}

}  // namespace

std::string widget_schema(const CanonicalTaxonomy& taxonomy) {
  return "widget-v1/" + taxonomy.version() + "/" + std::to_string(taxonomy.screens().size());
}

std::size_t widget_dims(const CanonicalTaxonomy& taxonomy) {
  return kWidgetTokenDims + taxonomy.screens().size() + kWidgetCropSide * kWidgetCropSide + kClassTypeCount + 9;
}

std::vector<double> hashed_tokens(std::string_view text, std::size_t dims) {
  std::vector<double> v(dims, 0.0);
  for (const std::string& t : tokenize(text)) v[fnv1a64(t) % dims] += 1.0;
  l2_normalize(v.begin(), v.end());
  return v;
}

FeatureVector screen_features(const AbstractScreen& abstraction, std::string_view text) {
  const cv::Mat& img = abstraction.image;
  FeatureVector fv{std::string(kScreenSchema), std::vector<double>(2 * kScreenGrid * kScreenGrid + kScreenTokenDims)};
  if (!img.empty()) {
    for (int gy = 0; gy < kScreenGrid; ++gy) {
      int y0 = gy * img.rows / kScreenGrid, y1 = (gy + 1) * img.rows / kScreenGrid;
      for (int gx = 0; gx < kScreenGrid; ++gx) {
        int x0 = gx * img.cols / kScreenGrid, x1 = (gx + 1) * img.cols / kScreenGrid;
        int yellow = 0, blue = 0, total = (y1 - y0) * (x1 - x0);
        for (int y = y0; y < y1; ++y) {
          const cv::Vec3b* row = img.ptr<cv::Vec3b>(y);
          for (int x = x0; x < x1; ++x) {
            if (row[x] == kAbstractYellow) ++yellow;
            else if (row[x] == kAbstractBlue) ++blue;
          }
        }
        if (total <= 0) continue;
        fv.values[gy * kScreenGrid + gx] = static_cast<double>(yellow) / total;
        fv.values[kScreenGrid * kScreenGrid + gy * kScreenGrid + gx] = static_cast<double>(blue) / total;
      }
    }
  }
  const auto grid_end = fv.values.begin() + 2 * kScreenGrid * kScreenGrid;
  l2_normalize(fv.values.begin(), grid_end);
  auto tokens = hashed_tokens(text, kScreenTokenDims);
  std::copy(tokens.begin(), tokens.end(), grid_end);
  return fv;
}

FeatureVector screen_features(const cv::Mat& screen, const AbstractScreen& abstraction,
                              const TextExtraction& extractor) {
  return screen_features(abstraction, join_words(extractor.extract(screen)));
}

FeatureVector widget_features(const Widget& widget, std::string_view screen_category,
                              const CanonicalTaxonomy& taxonomy) {
  const std::size_t screen_idx = taxonomy.screen_index(screen_category);
  FeatureVector fv{widget_schema(taxonomy), {}};
  fv.values.reserve(widget_dims(taxonomy));

  auto tokens = hashed_tokens(widget.element.text, kWidgetTokenDims);
  fv.values.insert(fv.values.end(), tokens.begin(), tokens.end());

  std::vector<double> screen(taxonomy.screens().size(), 0.0);
  screen[screen_idx] = 1.0;
  fv.values.insert(fv.values.end(), screen.begin(), screen.end());

  std::vector<double> crop(kWidgetCropSide * kWidgetCropSide, 0.0);
  if (!widget.element.crop.empty()) {
    cv::Mat gray, small;
    if (widget.element.crop.channels() == 3) cv::cvtColor(widget.element.crop, gray, cv::COLOR_BGR2GRAY);
    else gray = widget.element.crop;
    cv::resize(gray, small, {kWidgetCropSide, kWidgetCropSide}, 0, 0, cv::INTER_AREA);
    for (int y = 0; y < kWidgetCropSide; ++y)
      for (int x = 0; x < kWidgetCropSide; ++x) crop[y * kWidgetCropSide + x] = small.at<uchar>(y, x) / 255.0;
    double n = 0.0;
    for (double v : crop) n += v * v;
    if (n > 0.0)
      for (double& v : crop) v /= std::sqrt(n);
  }
  fv.values.insert(fv.values.end(), crop.begin(), crop.end());

  std::vector<double> type(kClassTypeCount, 0.0);
  type[static_cast<int>(widget.class_type)] = 1.0;
  fv.values.insert(fv.values.end(), type.begin(), type.end());

  std::vector<double> zone(9, 0.0);
  zone[std::clamp(widget.zone, 1, 9) - 1] = 1.0;
  fv.values.insert(fv.values.end(), zone.begin(), zone.end());
  return fv;
}

}  // namespace ugen
