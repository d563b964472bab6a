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
#include <vector>

#include <opencv2/core.hpp>

#include "ugen/classifier.hpp"
#include "ugen/gui.hpp"
#include "ugen/taxonomy.hpp"
#include "ugen/text.hpp"

namespace ugen {

inline constexpr int kScreenGrid = 16;
inline constexpr int kScreenTokenDims = 256;
inline constexpr int kWidgetTokenDims = 128;
inline constexpr int kWidgetCropSide = 16;

inline constexpr std::string_view kScreenSchema = "screen-v1";

/// `widget-v1/<taxonomy version>/<screen count>`; the screen one-hot block
/// depends on the taxonomy.
std::string widget_schema(const CanonicalTaxonomy& taxonomy);
std::size_t widget_dims(const CanonicalTaxonomy& taxonomy);

/// Token counts hashed into `dims` buckets, L2-normalized (zero stays zero).
std::vector<double> hashed_tokens(std::string_view text, std::size_t dims);

/// 16x16 yellow coverage, 16x16 blue coverage (one L2-normalized block), then
/// 256 hashed tokens of `text` (L2-normalized).
FeatureVector screen_features(const AbstractScreen& abstraction, std::string_view text);

FeatureVector screen_features(const cv::Mat& screen, const AbstractScreen& abstraction,
                              const TextExtraction& extractor);

/// Text tokens, screen-category one-hot, 16x16 grey crop (L2-normalized), class-type one-hot
/// and zone one-hot. Throws Error(UnknownCategory) for an unknown screen.
FeatureVector widget_features(const Widget& widget, std::string_view screen_category,
                              const CanonicalTaxonomy& taxonomy);

}  // namespace ugen
