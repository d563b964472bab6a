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

#include "ugen/taxonomy.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ugen/error.hpp"
#include "ugen/text.hpp"

namespace ugen {

namespace detail {
extern const std::string_view kDefaultTaxonomyJson;
}

using nlohmann::json;

CanonicalTaxonomy::CanonicalTaxonomy(std::string version, std::vector<ScreenCategory> screens,
                                     std::vector<WidgetCategory> widgets, std::vector<ParentClassRule> rules)
    : version_(std::move(version)), screens_(std::move(screens)), widgets_(std::move(widgets)), rules_(std::move(rules)) {
  validate();
}

void CanonicalTaxonomy::validate() const {
  std::set<std::string> seen;
  for (const auto& s : screens_) {
    if (s.name.empty() || !seen.insert("s:" + s.name).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate or empty screen category '" + s.name + "'");
    }
  }
  for (const auto& w : widgets_) {
    if (w.name.empty() || !seen.insert("w:" + w.name).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate or empty widget category '" + w.name + "'");
    }
    if (w.terms.empty()) throw Error(ErrorCode::InvalidInput, "widget category '" + w.name + "' has no terms");
  }
}

CanonicalTaxonomy CanonicalTaxonomy::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("taxonomy: ") + e.what());
  }
  try {
    std::vector<ScreenCategory> screens;
    for (const auto& s : doc.at("screens")) screens.push_back({s.at("name"), s.value("description", "")});
    std::vector<WidgetCategory> widgets;
    for (const auto& w : doc.at("widgets")) {
      widgets.push_back({w.at("name"), w.value("description", ""), w.at("terms").get<std::vector<std::string>>()});
    }
    std::vector<ParentClassRule> rules;
    if (doc.contains("parent_rules")) {
      for (const auto& r : doc.at("parent_rules")) {
        rules.push_back({r.at("parent_class"), r.at("categories").get<std::vector<std::string>>()});
      }
    }
    return CanonicalTaxonomy(doc.at("version"), std::move(screens), std::move(widgets), std::move(rules));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("taxonomy field: ") + e.what());
  }
}

CanonicalTaxonomy CanonicalTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open taxonomy " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string CanonicalTaxonomy::to_json() const {
  json doc;
  doc["version"] = version_;
  doc["screens"] = json::array();
  for (const auto& s : screens_) doc["screens"].push_back({{"name", s.name}, {"description", s.description}});
  doc["widgets"] = json::array();
  for (const auto& w : widgets_) {
    doc["widgets"].push_back({{"name", w.name}, {"description", w.description}, {"terms", w.terms}});
  }
  doc["parent_rules"] = json::array();
  for (const auto& r : rules_) doc["parent_rules"].push_back({{"parent_class", r.parent_class}, {"categories", r.categories}});
  return doc.dump(2);
}

bool CanonicalTaxonomy::has_screen(std::string_view name) const {
  for (const auto& s : screens_) {
    if (s.name == name) return true;
  }
  return false;
}

bool CanonicalTaxonomy::has_widget(std::string_view name) const {
  for (const auto& w : widgets_) {
    if (w.name == name) return true;
  }
  return false;
}

std::size_t CanonicalTaxonomy::screen_index(std::string_view name) const {
  for (std::size_t i = 0; i < screens_.size(); ++i) {
    if (screens_[i].name == name) return i;
  }
  throw Error(ErrorCode::UnknownCategory, "screen category '" + std::string(name) + "'");
}

const WidgetCategory& CanonicalTaxonomy::widget(std::string_view name) const {
  for (const auto& w : widgets_) {
    if (w.name == name) return w;
  }
  throw Error(ErrorCode::UnknownCategory, "widget category '" + std::string(name) + "'");
}

std::vector<std::string> CanonicalTaxonomy::widget_term_tokens(std::string_view name) const {
  std::set<std::string> tokens;
  for (const auto& term : widget(name).terms) {
    for (const auto& t : tokenize(term)) tokens.insert(stem(t));
  }
  return {tokens.begin(), tokens.end()};
}

const CanonicalTaxonomy& default_taxonomy() {
  static const CanonicalTaxonomy taxonomy = CanonicalTaxonomy::parse(detail::kDefaultTaxonomyJson);
  return taxonomy;
}

}  // namespace ugen
