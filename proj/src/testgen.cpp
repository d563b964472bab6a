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

#include "ugen/testgen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ugen/error.hpp"
#include "ugen/features.hpp"

namespace ugen {

using nlohmann::json;

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::AwaitingScreenChoice: return "awaiting_screen_choice";
    case SessionStatus::AwaitingWidgetChoice: return "awaiting_widget_choice";
    case SessionStatus::AwaitingTextInput: return "awaiting_text_input";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Failed: return "failed";
  }
  return "failed";
}

std::pair<double, std::size_t> term_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - inter;
  return {uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni), inter};
}

namespace {

std::vector<std::string> stemmed(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text)) out.push_back(stem(t));
  return out;
}

bool parent_rule_matches(const DeviceWidget& w, const std::string& category, const CanonicalTaxonomy& tax) {
  if (!w.widget.parent_class) return false;
  for (const auto& r : tax.parent_rules()) {
    if (r.parent_class != *w.widget.parent_class) continue;
    if (std::find(r.categories.begin(), r.categories.end(), category) != r.categories.end()) return true;
  }
  return false;
}

}  // namespace

std::vector<Recommendation> match_widgets(const DeviceState& state, const std::string& screen_category,
                                          const std::vector<Transition>& expected, const Categorizer* widget_classifier,
                                          const CanonicalTaxonomy& taxonomy, const MatchConfig& config) {
  std::map<std::pair<std::string, Transition>, Recommendation> found;
  auto add = [&](Recommendation r) {
    auto key = std::make_pair(r.widget_id, r.transition);
    if (!found.count(key)) found.emplace(std::move(key), std::move(r));
  };

  std::vector<std::vector<std::string>> widget_terms;
  for (const auto& w : state.widgets) widget_terms.push_back(stemmed(w.widget.element.text));

  // tier 1: term correlation or parent-class rule
  for (const auto& t : expected) {
    if (!t.widget || !taxonomy.has_widget(*t.widget)) continue;
    auto terms = taxonomy.widget_term_tokens(*t.widget);
    for (std::size_t i = 0; i < state.widgets.size(); ++i) {
      auto [score, overlap] = term_similarity(widget_terms[i], terms);
      bool parent = parent_rule_matches(state.widgets[i], *t.widget, taxonomy);
      if (!parent && overlap == 0) continue;
      add({state.widgets[i].id, t, 1, parent ? 1.0 : score, score});
    }
  }

  if (widget_classifier && found.size() < config.rec_threshold && taxonomy.has_screen(screen_category)) {
    std::vector<TopKPrediction> preds;
    for (const auto& w : state.widgets)
      preds.push_back(widget_classifier->predict_topk(widget_features(w.widget, screen_category, taxonomy),
                                                      std::max<std::size_t>(config.top_k, 1)));
    for (int tier : {2, 3}) {
      if (found.size() >= config.rec_threshold) break;
      for (const auto& t : expected) {
        if (!t.widget) continue;
        for (std::size_t i = 0; i < state.widgets.size(); ++i) {
          const auto& p = preds[i];
          bool ok = tier == 2 ? (!p.empty() && p.top() == *t.widget) : p.contains(*t.widget);
          if (!ok) continue;
          auto [score, overlap] = term_similarity(widget_terms[i], taxonomy.widget_term_tokens(*t.widget));
          (void)overlap;
          add({state.widgets[i].id, t, tier, p.confidence(*t.widget), score});
        }
      }
    }
  }

  for (const auto& t : expected)
    if (!t.widget) add({std::string(kScreenWidgetId), t, 4, 0.0, 0.0});

  std::vector<Recommendation> out;
  for (auto& [k, r] : found) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.term_score != b.term_score) return a.term_score > b.term_score;
    if (a.widget_id != b.widget_id) return a.widget_id < b.widget_id;
    return a.transition < b.transition;
  });
  return out;
}

FeatureVector screenshot_features(const cv::Mat& screenshot, const TextExtraction& extractor) {
  auto elements = extract_elements(screenshot, extractor);
  return screen_features(screenshot, abstract_screen(screenshot, elements), extractor);
}

std::string TestScript::to_json() const {
  json doc = {{"usage_id", usage_id}, {"app_id", app_id}, {"events", json::array()}};
  doc["final_screen"] = final_screen ? json(*final_screen) : json(nullptr);
  for (const auto& e : events) {
    json je = {{"screen", e.screen},
               {"widget_id", e.widget_id},
               {"action", to_string(e.action)},
               {"box", json::array({e.box.x, e.box.y, e.box.w, e.box.h})},
               {"widget_text", e.widget_text}};
    je["canonical_widget"] = e.canonical_widget ? json(*e.canonical_widget) : json(nullptr);
    je["text"] = e.text ? json(*e.text) : json(nullptr);
    doc["events"].push_back(std::move(je));
  }
  return doc.dump(1) + "\n";
}

TestScript TestScript::parse(const std::string& json_text) {
  TestScript s;
  try {
    json doc = json::parse(json_text);
    s.usage_id = doc.at("usage_id").get<std::string>();
    s.app_id = doc.value("app_id", "");
    if (doc.contains("final_screen") && !doc["final_screen"].is_null())
      s.final_screen = doc["final_screen"].get<std::string>();
    for (const auto& je : doc.at("events")) {
      ScriptEvent e;
      e.screen = je.value("screen", "");
      e.widget_id = je.value("widget_id", "");
      e.action = parse_action_kind(je.value("action", "click"));
      if (je.contains("canonical_widget") && !je["canonical_widget"].is_null())
        e.canonical_widget = je["canonical_widget"].get<std::string>();
      if (je.contains("text") && !je["text"].is_null()) e.text = je["text"].get<std::string>();
      if (je.contains("box")) {
        const auto& b = je["box"];
        e.box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
      }
      e.widget_text = je.value("widget_text", "");
      if (is_swipe(e.action) != e.widget_id.empty())
        throw Error(ErrorCode::InvalidInput, "test script: widget_id must be empty iff the action is a swipe");
      s.events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("test script: ") + e.what());
  }
  return s;
}

std::vector<std::string> replay_script(const TestScript& script, DeviceAdapter& adapter) {
  std::vector<std::string> visited{adapter.reset().screen_id};
  for (const auto& e : script.events) {
    adapter.execute({e.widget_id, e.action, e.text});
    visited.push_back(adapter.current_state().screen_id);
  }
  return visited;
}

GenerationSession::GenerationSession(std::string app_id, IrModel model, SessionDeps deps, GenerationConfig config)
    : app_id_(std::move(app_id)), model_(std::move(model)), deps_(std::move(deps)), config_(config) {
  if (!deps_.adapter || !deps_.screen_classifier || !deps_.extractor || !deps_.taxonomy)
    throw Error(ErrorCode::InvalidInput, "session needs an adapter, a screen classifier, an extractor and a taxonomy");
  script_.usage_id = model_.usage_id();
  script_.app_id = app_id_;
  try {
    device_ = deps_.adapter->reset();
  } catch (const Error& e) {
    fail(ErrorCode::AdapterError, e.what());
    throw;
  }
  observe();
}

void GenerationSession::fail(ErrorCode code, const std::string& message) {
  status_ = SessionStatus::Failed;
  failure_ = std::string(to_string(code)) + ": " + message;
  recommendations_.clear();
}

void GenerationSession::observe() {
  visited_.push_back(device_.screen_id);
  auto pred = deps_.screen_classifier->predict_topk(screenshot_features(device_.screenshot, *deps_.extractor),
                                                     config_.screen_top_k);
  screen_suggestions_ = pred.entries;
  recommendations_.clear();
  current_state_.reset();
  status_ = SessionStatus::AwaitingScreenChoice;
}

void GenerationSession::choose_screen(const std::string& category) {
  if (status_ != SessionStatus::AwaitingScreenChoice)
    throw Error(ErrorCode::InvalidChoice, "not awaiting a screen choice");
  if (!model_.has_state(category))
    throw Error(ErrorCode::NoMatchingState, "'" + category + "' is not a state of usage " + model_.usage_id());
  current_state_ = category;
  auto succ = model_.successors(category);
  if (model_.is_end(category) && (!script_.events.empty() || succ.empty())) {
    script_.final_screen = category;
    status_ = SessionStatus::Completed;
    return;
  }
  if (succ.empty()) {
    fail(ErrorCode::NoRecommendation, "state " + category + " has no outgoing transitions");
    throw Error(ErrorCode::NoRecommendation, "state " + category + " has no outgoing transitions");
  }
  recommendations_ = match_widgets(device_, category, succ, deps_.widget_classifier.get(), *deps_.taxonomy,
                                   config_.match);
  if (recommendations_.empty()) {
    fail(ErrorCode::NoRecommendation, "no widget on screen matches a transition of " + category);
    throw Error(ErrorCode::NoRecommendation, "no widget on screen matches a transition of " + category);
  }
  status_ = SessionStatus::AwaitingWidgetChoice;
}

void GenerationSession::choose_widget(const std::string& widget_id) {
  if (status_ != SessionStatus::AwaitingWidgetChoice)
    throw Error(ErrorCode::InvalidChoice, "not awaiting a widget choice");
  auto it = std::find_if(recommendations_.begin(), recommendations_.end(),
                         [&](const Recommendation& r) { return r.widget_id == widget_id; });
  if (it == recommendations_.end()) throw Error(ErrorCode::InvalidChoice, "'" + widget_id + "' was not recommended");
  Recommendation rec = *it;
  if (rec.transition.widget) {
    const auto* w = device_.widget(rec.widget_id);
    if (w && w->widget.class_type == ClassType::EditText) {
      pending_ = rec;
      status_ = SessionStatus::AwaitingTextInput;
      return;
    }
  }
  perform(rec, std::nullopt);
}

void GenerationSession::provide_text(const std::string& text) {
  if (status_ != SessionStatus::AwaitingTextInput || !pending_)
    throw Error(ErrorCode::InvalidChoice, "not awaiting text input");
  Recommendation rec = *pending_;
  pending_.reset();
  perform(rec, text);
}

void GenerationSession::perform(const Recommendation& rec, std::optional<std::string> text) {
  ScriptEvent ev;
  ev.screen = *current_state_;
  ev.action = rec.transition.action;
  ev.canonical_widget = rec.transition.widget;
  ev.text = text;
  if (rec.transition.widget) {
    ev.widget_id = rec.widget_id;
    if (const auto* w = device_.widget(rec.widget_id)) {
      ev.box = w->widget.element.box;
      ev.widget_text = w->widget.element.text;
    }
  }
  try {
    deps_.adapter->execute({ev.widget_id, ev.action, ev.text});
    device_ = deps_.adapter->current_state();
  } catch (const Error& e) {
    fail(ErrorCode::AdapterError, e.what());
    throw;
  }
  script_.events.push_back(std::move(ev));
  if (model_.is_end(rec.transition.to)) {
    visited_.push_back(device_.screen_id);
    current_state_ = rec.transition.to;
    script_.final_screen = rec.transition.to;
    recommendations_.clear();
    status_ = SessionStatus::Completed;
    return;
  }
  observe();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
      else if (c == '"') quoted = false;
      else out.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

std::string step_log_csv(const std::vector<StepLogRow>& rows) {
  std::ostringstream out;
  out << "step,expected,suggested_top1,suggested_top2,suggested_top3,suggested_top4,suggested_top5,hit\n";
  for (const auto& r : rows) {
    out << r.step << ',' << csv_field(r.expected);
    for (std::size_t i = 0; i < 5; ++i) out << ',' << (i < r.suggested.size() ? csv_field(r.suggested[i]) : "");
    out << ',' << (r.hit ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<StepLogRow> parse_step_log_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,expected", 0) != 0)
    throw Error(ErrorCode::InvalidInput, "step log: missing header");
  std::vector<StepLogRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = csv_split(line);
    if (f.size() != 8 || (f[7] != "0" && f[7] != "1"))
      throw Error(ErrorCode::InvalidInput, "step log: malformed line " + std::to_string(lineno));
    StepLogRow r;
    try {
      r.step = std::stoi(f[0]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, "step log: bad step on line " + std::to_string(lineno));
    }
    r.expected = f[1];
    for (int i = 2; i < 7; ++i)
      if (!f[i].empty()) r.suggested.push_back(f[i]);
    r.hit = f[7] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

OracleResult run_oracle_session(const std::string& app_id, const IrModel& model, const OracleTrace& truth,
                                SessionDeps deps, const GenerationConfig& config) {
  OracleResult result;
  GenerationSession session(app_id, model, std::move(deps), config);
  const std::size_t n = truth.steps.size();
  const std::size_t cap = 3 * n + 10;
  std::size_t p = 0, choices = 0;
  bool stuck = false;

  auto realign = [&](bool matched) {
    if (matched) {
      ++p;
      return;
    }
    const auto& cur = session.device_state().screen_id;
    for (std::size_t j = p; j < n; ++j)
      if (truth.steps[j].device_screen == cur) return void(p = j);
    for (std::size_t j = 0; j < p && j < n; ++j)
      if (truth.steps[j].device_screen == cur) return void(p = j);
    if (cur == truth.final_device_screen) p = n;
  };

  try {
    while (!stuck && choices < cap && session.status() != SessionStatus::Completed &&
           session.status() != SessionStatus::Failed) {
      ++choices;
      if (session.status() == SessionStatus::AwaitingScreenChoice) {
        const std::string expected = p < n ? truth.steps[p].screen : truth.final_screen;
        std::vector<std::string> order;
        for (const auto& [name, conf] : session.screen_suggestions())
          if (name == expected) order.push_back(name);
        for (const auto& [name, conf] : session.screen_suggestions())
          if (name != expected) order.push_back(name);
        bool chosen = false;
        for (const auto& name : order) {
          try {
            session.choose_screen(name);
            chosen = true;
            break;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NoMatchingState) throw;
          }
        }
        if (!chosen) {
          result.failure = "no suggested screen is a model state";
          stuck = true;
        }
        continue;
      }
      // AwaitingWidgetChoice
      std::string expected;
      if (p < n) expected = truth.steps[p].widget_id.empty() ? std::string(kScreenWidgetId) : truth.steps[p].widget_id;
      StepLogRow row;
      row.step = static_cast<int>(result.log.size()) + 1;
      row.expected = expected;
      bool offered = false;
      for (const auto& r : session.recommendations()) {
        if (r.widget_id == expected) offered = true;
        if (row.suggested.size() < 5 &&
            std::find(row.suggested.begin(), row.suggested.end(), r.widget_id) == row.suggested.end())
          row.suggested.push_back(r.widget_id);
      }
      row.hit = offered && !expected.empty();
      result.log.push_back(row);
      const std::string pick = row.hit ? expected : session.recommendations().front().widget_id;
      session.choose_widget(pick);
      if (session.status() == SessionStatus::AwaitingTextInput)
        session.provide_text(row.hit ? truth.steps[p].text.value_or("") : "");
      realign(row.hit);
    }
  } catch (const Error& e) {
    result.failure = e.what();
  }

  result.status = stuck ? SessionStatus::Failed : session.status();
  if (result.failure.empty()) result.failure = session.failure();
  if (result.failure.empty() && result.status != SessionStatus::Completed) result.failure = "step cap reached";
  result.script = session.script();
  result.visited_screens = session.visited_screens();
  result.accomplished =
      result.status == SessionStatus::Completed && session.device_state().screen_id == truth.final_device_screen;
  return result;
}

}  // namespace ugen
