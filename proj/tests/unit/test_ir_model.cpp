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

#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "ugen/error.hpp"
#include "ugen/ir_model.hpp"

namespace ugen {
namespace {

const CanonicalTaxonomy& tax() { return default_taxonomy(); }

TraceStep click(std::string screen, std::string widget) { return {std::move(screen), std::move(widget), ActionKind::Click}; }

LabeledTrace sign_in_trace(std::string app) {
  return {"sign_in",
          {click("home", "menu"), click("menu", "sign_in"), click("sign_in", "username"), click("sign_in", "password"),
           click("sign_in", "submit")},
          "account",
          {std::move(app), "rec1"}};
}

TEST(Build, SelfTransitionOnRepeatedScreen) {
  auto m = build_model(sign_in_trace("6pm"), tax());
  EXPECT_EQ(m.states().size(), 4u);
  EXPECT_EQ(m.states()[0].name, "home");
  EXPECT_TRUE(m.states()[0].is_start);
  EXPECT_TRUE(m.state("account").is_end);
  EXPECT_TRUE(m.transitions().count({"sign_in", "username", ActionKind::Click, "sign_in"}));
  EXPECT_TRUE(m.transitions().count({"sign_in", "submit", ActionKind::Click, "account"}));
  EXPECT_EQ(m.transitions().size(), 5u);
}

TEST(Build, MinimalTrace) {
  auto m = build_model({"open_menu", {click("home", "menu")}, "menu", {"a", "r"}}, tax());
  EXPECT_EQ(m.states().size(), 2u);
  EXPECT_EQ(m.transitions().size(), 1u);
}

TEST(Build, ReturnVisitSharesState) {
  auto m = build_model({"search", {click("home", "search"), click("search", "back")}, "home", {"a", "r"}}, tax());
  ASSERT_EQ(m.states().size(), 2u);
  std::set<Transition> want = {{"home", "search", ActionKind::Click, "search"},
                               {"search", "back", ActionKind::Click, "home"}};
  EXPECT_EQ(m.transitions(), want);
  EXPECT_TRUE(m.state("home").is_start);
  EXPECT_TRUE(m.state("home").is_end);
}

TEST(Build, Errors) {
  try {
    build_model({"u", {click("nowhere", "menu")}, "home", {}}, tax());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCategory);
  }
  EXPECT_THROW(build_model({"u", {}, "home", {}}, tax()), Error);
  EXPECT_THROW(build_model({"u", {{"home", std::nullopt, ActionKind::Click}}, "home", {}}, tax()), Error);
  EXPECT_THROW(build_model({"u", {{"home", "menu", ActionKind::SwipeUp}}, "home", {}}, tax()), Error);
  auto swipe = build_model({"u", {{"home", std::nullopt, ActionKind::SwipeUp}}, "home", {}}, tax());
  EXPECT_EQ(swipe.transitions().size(), 1u);
}

TEST(Merge, IdempotentAndUnion) {
  auto a = build_model(sign_in_trace("6pm"), tax());
  EXPECT_EQ(merge_models({a, a}).transitions(), a.transitions());
  LabeledTrace etsy = {"sign_in",
                       {click("home", "account"), click("sign_in", "username"), click("sign_in", "submit")},
                       "home",
                       {"etsy", "r2"}};
  auto b = build_model(etsy, tax());
  auto m = merge_models({a, b});
  for (const auto& t : a.transitions()) EXPECT_TRUE(m.transitions().count(t));
  for (const auto& t : b.transitions()) EXPECT_TRUE(m.transitions().count(t));
  EXPECT_EQ(m.provenance().size(), 2u);
  EXPECT_TRUE(m.state("home").is_end);
  EXPECT_TRUE(m.state("account").is_end);
  auto succ = m.successors("sign_in");
  ASSERT_EQ(succ.size(), 4u);
  EXPECT_EQ(*succ[0].widget, "password");
  EXPECT_EQ(to_string(succ[1]), "sign_in submit click account");
  EXPECT_EQ(to_string(succ[2]), "sign_in submit click home");
  EXPECT_EQ(*succ[3].widget, "username");
  EXPECT_TRUE(m.successors("account").empty());
  EXPECT_THROW(m.successors("nowhere"), Error);
}

TEST(Merge, UsageMismatch) {
  auto a = build_model(sign_in_trace("x"), tax());
  auto b = build_model({"other", {click("home", "menu")}, "menu", {}}, tax());
  try {
    merge_models({a, b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UsageMismatch);
  }
}

IrModel random_model(std::mt19937_64& rng, int idx) {
  static const std::vector<std::string> screens = {"home", "menu", "sign_in", "account", "search", "settings"};
  static const std::vector<std::string> widgets = {"menu", "account", "sign_in", "search", "back", "submit"};
  LabeledTrace t;
  t.usage_id = "u";
  t.source = {"app" + std::to_string(idx), "r"};
  int n = 1 + static_cast<int>(rng() % 8);
  for (int i = 0; i < n; ++i) {
    if (rng() % 5 == 0) t.steps.push_back({screens[rng() % screens.size()], std::nullopt, ActionKind::SwipeUp});
    else t.steps.push_back(click(screens[rng() % screens.size()], widgets[rng() % widgets.size()]));
  }
  t.final_screen = screens[rng() % screens.size()];
  return build_model(t, tax());
}

std::set<std::string> state_names(const IrModel& m) {
  std::set<std::string> s;
  for (const auto& st : m.states()) s.insert(st.name + (st.is_start ? "+s" : "") + (st.is_end ? "+e" : ""));
  return s;
}

TEST(Merge, AlgebraicProperties) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_model(rng, 1), b = random_model(rng, 2), c = random_model(rng, 3);
    auto ab = merge_models({a, b});
    std::set<Transition> uni = a.transitions();
    uni.insert(b.transitions().begin(), b.transitions().end());
    EXPECT_EQ(ab.transitions(), uni);
    EXPECT_EQ(ab.transitions(), merge_models({b, a}).transitions());
    EXPECT_EQ(state_names(ab), state_names(merge_models({b, a})));
    auto left = merge_models({merge_models({a, b}), c}), right = merge_models({a, merge_models({b, c})});
    EXPECT_EQ(left.transitions(), right.transitions());
    EXPECT_EQ(state_names(left), state_names(right));
    EXPECT_EQ(merge_models({a, a}).transitions(), a.transitions());
    EXPECT_NO_THROW(ab.validate());
  }
}

TEST(Build, ReplayedPathsUseModelEdges) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_model(rng, 0);
    std::string cur = m.start_states().front();
    for (int step = 0; step < 20; ++step) {
      auto succ = m.successors(cur);
      if (succ.empty()) break;
      const auto& t = succ[rng() % succ.size()];
      EXPECT_TRUE(m.transitions().count(t));
      EXPECT_EQ(t.from, cur);
      cur = t.to;
    }
  }
}

TEST(Text, RoundTripAndCorruption) {
  auto m = merge_models({build_model(sign_in_trace("6pm"), tax()),
                         build_model({"sign_in", {{"home", std::nullopt, ActionKind::SwipeDown}}, "home", {"b", "r"}},
                                     tax())});
  auto back = IrModel::from_text(m.to_text());
  EXPECT_EQ(back, m);
  std::string text = m.to_text();
  for (std::size_t cut : {std::size_t{5}, text.size() / 2, text.size() - 4}) {
    try {
      IrModel::from_text(text.substr(0, cut));
      FAIL() << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ModelParseError);
    }
  }
  // unreachable end state is rejected on load
  std::string bad =
      "IRMODEL 1\nusage u\ntaxonomy -\nPROVENANCE 1\na\tr\nSTATES 2\nhome 1 0\nmenu 0 1\nTRANSITIONS 0\nEND\n";
  EXPECT_THROW(IrModel::from_text(bad), Error);
  std::string two_starts =
      "IRMODEL 1\nusage u\ntaxonomy -\nPROVENANCE 1\na\tr\nSTATES 2\nhome 1 1\nmenu 1 0\nTRANSITIONS 0\nEND\n";
  EXPECT_THROW(IrModel::from_text(two_starts), Error);
}

TEST(Database, StoreLoadListMerge) {
  auto root = std::filesystem::temp_directory_path() / "ugen_db_test";
  std::filesystem::remove_all(root);
  ModelDatabase db(root);
  auto a = build_model(sign_in_trace("6pm"), tax());
  auto b = build_model({"sign_in", {click("home", "account")}, "sign_in", {"etsy", "r9"}}, tax());
  auto c = build_model({"search", {click("home", "search")}, "search", {"etsy", "r3"}}, tax());
  auto ia = db.store(a);
  db.store(b);
  db.store(c);
  EXPECT_EQ(db.load(ia), a);
  EXPECT_EQ(db.list("sign_in").size(), 2u);
  EXPECT_EQ(db.list().size(), 3u);
  EXPECT_EQ(db.usages(), (std::vector<std::string>{"search", "sign_in"}));
  auto merged = db.merged("sign_in");
  EXPECT_EQ(merged.transitions(), merge_models({a, b}).transitions());
  EXPECT_TRUE(std::filesystem::exists(root / "merged" / "sign_in.ir"));
  db.store(a);
  EXPECT_FALSE(std::filesystem::exists(root / "merged" / "sign_in.ir"));
  EXPECT_EQ(db.merged("sign_in").provenance().size(), 3u);
  try {
    db.merged("nothing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoModelForUsage);
  }
  // truncated model file
  std::ofstream(root / "models" / "sign_in" / (ia + ".ir"), std::ios::trunc) << "IRMODEL 1\nusage sign_in\n";
  try {
    db.load(ia);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ModelParseError);
  }
  std::filesystem::remove_all(root);
}

TEST(Trace, JsonRoundTrip) {
  LabeledTrace t{"help",
                 {{"home", std::nullopt, ActionKind::SwipeUp}, {"home", "menu", ActionKind::Click}},
                 "help",
                 {"birch", "birch-help"}};
  LabeledTrace back = trace_from_json(trace_to_json(t));
  EXPECT_EQ(trace_to_json(back), trace_to_json(t));
  EXPECT_FALSE(back.steps[0].widget);
  EXPECT_EQ(back.source.recording_id, "birch-help");
  EXPECT_THROW(trace_from_json("{\"steps\": []}"), Error);
  EXPECT_THROW(trace_from_json("{\"usage_id\": \"u\", \"steps\": [{\"screen\": \"home\", \"action\": \"hop\"}]}"),
               Error);
}

}  // namespace
}  // namespace ugen
