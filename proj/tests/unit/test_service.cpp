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

#include <chrono>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ugen/eval.hpp"
#include "ugen/service.hpp"
#include "ugen/workspace.hpp"

#include <httplib.h>

namespace ugen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Fixture {
  fs::path root;
  FixtureSpec spec;
  FixtureSet set;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    f.root = fs::temp_directory_path() / "ugen_service_test";
    fs::remove_all(f.root);
    f.spec = default_fixture_spec(11, false);
    GlyphTextExtractor ocr;
    f.set = generate_fixtures(f.spec, default_taxonomy(), ocr);
    auto keep = f.set.recordings;
    f.set.recordings.clear();
    for (auto& r : keep)
      if ((r.truth.usage_id == "sign_in" || r.truth.usage_id == "add_cart") &&
          (r.truth.app_id == "aurora" || r.truth.app_id == "birch"))
        f.set.recordings.push_back(std::move(r));
    write_fixtures(f.set, f.spec, f.root);
    Workspace ws(f.root);
    fs::create_directories(f.root / "classifiers");
    train(f.set.screen_examples, ModelKind::KNN).save(ws.classifier_path("screen"));
    train(f.set.widget_examples, ModelKind::KNN).save(ws.classifier_path("widget"));
    return f;
  }();
  return f;
}

const GroundTruth& truth_of(const std::string& app, const std::string& usage = "sign_in") {
  for (const auto& r : fixture().set.recordings)
    if (r.truth.app_id == app && r.truth.usage_id == usage) return r.truth;
  throw std::logic_error("no recording for " + app);
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fixture();
    service_ = new Service(ServiceConfig{fixture().root, {}, {}, 2, 5});
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = new std::thread([] { service_->run(); });
  }
  static void TearDownTestSuite() {
    service_->stop();
    thread_->join();
    delete thread_;
    delete service_;
  }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

  json post(const std::string& path, const json& body, int expect, httplib::Headers headers = {}) {
    auto c = client();
    auto res = c.Post(path, headers, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  json get(const std::string& path, int expect) {
    auto c = client();
    auto res = c.Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  static Service* service_;
  static std::thread* thread_;
  static int port_;
};

Service* ServiceTest::service_ = nullptr;
std::thread* ServiceTest::thread_ = nullptr;
int ServiceTest::port_ = 0;

TEST_F(ServiceTest, ErrorStatuses) {
  EXPECT_EQ(get("/jobs/job-missing", 404)["error"], "NotFound");
  get("/recordings/nothing-here/events", 404);
  get("/label-sessions/label-0", 404);
  get("/gen-sessions/gen-0", 404);
  get("/models/none", 404);

  auto c = client();
  auto bad = c.Post("/recordings", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["error"], "BadRequest");

  post("/recordings", {{"manifest", {{"app_id", "a"}, {"usage_id", "u"}}}}, 422);
  post("/recordings", {{"manifest", {{"app_id", "a"}, {"usage_id", "u"}}}, {"frames", json::array()}}, 422);
  post("/recordings", {{"recording_id", "../x"}, {"manifest", {{"app_id", "a"}, {"usage_id", "u"}}}}, 422);
  post("/models/merge", {{"usage_id", "never_recorded"}}, 404);
  post("/gen-sessions", {{"usage_id", "never_recorded"}, {"adapter_ref", "script:aurora"}}, 404);

  auto esc = c.Get("/assets/../classifiers/screen.model");
  ASSERT_TRUE(esc);
  EXPECT_EQ(esc->status, 404);
  auto outside = c.Get("/assets/classifiers/screen.model");
  ASSERT_TRUE(outside);
  EXPECT_EQ(outside->status, 404);
}

TEST_F(ServiceTest, RecordingLabellingAndMerge) {
  const GroundTruth& truth = truth_of("aurora");
  const fs::path frames = fixture().root / "recordings" / truth.recording_id / "frames";
  json body = {{"recording_id", "upload-1"},
               {"manifest", {{"app_id", "aurora"}, {"usage_id", "sign_in"}, {"fps", 30}}},
               {"frames_dir", frames.string()}};
  httplib::Headers token = {{"Idempotency-Key", "tok-1"}};
  json first = post("/recordings", body, 202, token);
  json again = post("/recordings", body, 202, token);
  EXPECT_EQ(first["job_id"], again["job_id"]);
  post("/recordings", body, 409);

  service_->wait_for_jobs();
  json job = get("/jobs/" + first["job_id"].get<std::string>(), 200);
  EXPECT_EQ(job["status"], "done");
  ASSERT_EQ(job["artifacts"].size(), 2u);
  auto c = client();
  auto asset = c.Get(job["artifacts"][0].get<std::string>());
  ASSERT_TRUE(asset);
  EXPECT_EQ(asset->status, 200);

  json events = get("/recordings/upload-1/events", 200);
  EXPECT_EQ(events.size(), truth.events.size());

  // Label the upload and a recording that only exists on disk.
  for (const auto& [rec, app] : {std::pair{std::string("upload-1"), std::string("aurora")},
                                 std::pair{truth_of("birch").recording_id, std::string("birch")}}) {
    const GroundTruth& t = truth_of(app);
    json view = post("/label-sessions", {{"recording_id", rec}, {"usage_id", "sign_in"}}, 201);
    const std::string id = view["session_id"];
    ASSERT_EQ(view["total"].get<std::size_t>(), t.retained_count() + 1);
    EXPECT_FALSE(view["item"]["screen_suggestions"].empty());
    post("/label-sessions/" + id + "/choice", {{"screen_label", "not_a_screen"}}, 422);
    for (const auto& e : t.events) {
      if (e.typing) continue;
      json choice = {{"screen_label", e.screen_label}};
      if (e.widget_label) choice["widget_label"] = *e.widget_label;
      view = post("/label-sessions/" + id + "/choice", choice, 200);
    }
    EXPECT_EQ(view["item"]["action"], "final");
    view = post("/label-sessions/" + id + "/choice", {{"screen_label", t.final_screen_label}}, 200);
    EXPECT_TRUE(view["done"].get<bool>());
    ASSERT_TRUE(view.contains("model_id"));
    post("/label-sessions/" + id + "/choice", {{"screen_label", t.final_screen_label}}, 409);
    get("/models/" + view["model_id"].get<std::string>(), 200);
    EXPECT_TRUE(fs::exists(fixture().root / "traces" / (rec + ".json")));
  }

  json models = get("/models?usage=sign_in", 200);
  EXPECT_EQ(models["models"].size(), 2u);
  json merged = post("/models/merge", {{"usage_id", "sign_in"}}, 200);
  EXPECT_EQ(merged["model_id"], "merged/sign_in");
  EXPECT_FALSE(merged["transitions"].empty());
  EXPECT_EQ(get("/jobs/" + merged["job_id"].get<std::string>(), 200)["kind"], "merge");
  get("/models/merged/sign_in", 200);
}

TEST_F(ServiceTest, GuidedGeneration) {
  ModelDatabase db(fixture().root);
  if (db.list("add_cart").empty())
    for (const char* app : {"aurora", "birch"})
      db.store(build_model(truth_of(app, "add_cart").labeled_trace(), default_taxonomy()));
  const OracleTrace oracle = truth_of("aurora", "add_cart").oracle_trace();
  json view = post("/gen-sessions", {{"usage_id", "add_cart"}, {"adapter_ref", "script:aurora"}, {"k", 5}}, 201);
  const std::string id = view["session_id"];
  const std::string base = "/gen-sessions/" + id;
  auto c = client();
  auto shot = c.Get(view["screenshot"].get<std::string>());
  ASSERT_TRUE(shot);
  EXPECT_EQ(shot->get_header_value("Content-Type"), "image/png");

  post(base + "/choice", {{"screen_label", "main"}, {"text", "x"}}, 422);
  post(base + "/choice", {{"widget_id", "w"}}, 409);
  post(base + "/choice", {{"screen_label", "not_a_screen"}}, 422);

  bool texted = false;
  for (int guard = 0; guard < 40; ++guard) {
    const std::string status = view["status"];
    if (status == "completed" || status == "failed") break;
    const std::string device = view["device_screen"];
    const std::size_t done = view["events"];
    const OracleStep* step = done < oracle.steps.size() ? &oracle.steps[done] : nullptr;
    if (status == "awaiting_screen_choice") {
      std::string label = device == oracle.final_device_screen ? oracle.final_screen : step ? step->screen : "";
      ASSERT_FALSE(label.empty()) << device;
      view = post(base + "/choice", {{"screen_label", label}}, 200);
    } else if (status == "awaiting_widget_choice") {
      ASSERT_FALSE(view["recommendations"].empty());
      if (guard < 3) post(base + "/choice", {{"text", "early"}}, 409);
      std::string pick = view["recommendations"][0]["widget_id"];
      for (const auto& r : view["recommendations"])
        if (step && r["widget_id"] == step->widget_id) pick = r["widget_id"];
      view = post(base + "/choice", {{"widget_id", pick}}, 200);
    } else {
      ASSERT_EQ(status, "awaiting_text_input");
      texted = true;
      view = post(base + "/choice", {{"text", step && step->text ? *step->text : "text"}}, 200);
    }
  }
  EXPECT_EQ(view["status"], "completed") << view.dump();
  EXPECT_TRUE(texted);
  EXPECT_EQ(get(base, 200)["status"], view["status"]);
  json script = get(base + "/script", 200);
  EXPECT_EQ(script["usage_id"], "add_cart");
  EXPECT_FALSE(script["events"].empty());
  post(base + "/choice", {{"text", "late"}}, 409);
}

}  // namespace
}  // namespace ugen
