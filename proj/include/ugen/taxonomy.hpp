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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ugen {

struct ScreenCategory {
  std::string name;
  std::string description;
};

struct WidgetCategory {
  std::string name;
  std::string description;
  std::vector<std::string> terms;  ///< terms and synonyms, free text
};

/// Widgets under a parent of `parent_class` are taken to belong to one of
/// `categories` (e.g. ListView => menu items).
struct ParentClassRule {
  std::string parent_class;
  std::vector<std::string> categories;
};

/// App-independent screen and widget categories. Loaded from a JSON data file
/// so it can grow without code changes.
class CanonicalTaxonomy {
 public:
  CanonicalTaxonomy() = default;
  CanonicalTaxonomy(std::string version, std::vector<ScreenCategory> screens, std::vector<WidgetCategory> widgets,
                    std::vector<ParentClassRule> rules = {});

  static CanonicalTaxonomy parse(std::string_view json_text);
  static CanonicalTaxonomy load(const std::filesystem::path& path);
  std::string to_json() const;

  const std::string& version() const { return version_; }
  const std::vector<ScreenCategory>& screens() const { return screens_; }
  const std::vector<WidgetCategory>& widgets() const { return widgets_; }
  const std::vector<ParentClassRule>& parent_rules() const { return rules_; }

  bool has_screen(std::string_view name) const;
  bool has_widget(std::string_view name) const;
  /// Index in screens(); throws Error(UnknownCategory).
  std::size_t screen_index(std::string_view name) const;
  /// Throws Error(UnknownCategory).
  const WidgetCategory& widget(std::string_view name) const;

  /// Stemmed tokens of every term of the category.
  std::vector<std::string> widget_term_tokens(std::string_view name) const;

 private:
  void validate() const;

  std::string version_;
  std::vector<ScreenCategory> screens_;
  std::vector<WidgetCategory> widgets_;
  std::vector<ParentClassRule> rules_;
};

/// Taxonomy shipped in data/taxonomy.json, compiled in as a fallback.
const CanonicalTaxonomy& default_taxonomy();

}  // namespace ugen
