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

#include "ugen/service.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ugen/error.hpp"
#include "ugen/features.hpp"
#include "ugen/pipeline.hpp"
#include "ugen/testgen.hpp"
#include "ugen/workspace.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

namespace ugen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Handler outcome before it is written to the wire.
struct Reply {
  int status = 200;
  json body;
};

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void http_fail(int status, std::string code, std::string message) {
  throw HttpError{status, std::move(code), std::move(message)};
}

int status_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoModelForUsage: return 404;
    case ErrorCode::InvalidChoice:
    case ErrorCode::NoMatchingState:
    case ErrorCode::UnknownCategory:
    case ErrorCode::InvalidInput:
    case ErrorCode::EmptyRecording:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ModelParseError:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::UsageMismatch:
    case ErrorCode::UnknownState: return 422;
    case ErrorCode::AdapterError: return 502;
    default: return 500;
  }
}

json suggestions_json(const std::vector<std::pair<std::string, double>>& s) {
  json arr = json::array();
  for (const auto& [label, conf] : s) arr.push_back({{"label", label}, {"confidence", conf}});
  return arr;
}

json transition_json(const Transition& t) {
  return {{"from", t.from}, {"widget", t.widget ? json(*t.widget) : json(nullptr)}, {"action", to_string(t.action)},
          {"to", t.to}};
}

std::string frame_name(int i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d.png", i);
  return buf;
}

std::string content_type_for(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".json") return "application/json";
  if (ext == ".csv") return "text/csv";
  return "text/plain";
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fixed-size pool; tasks run in submission order per free worker.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t n) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, n); ++i) threads_.emplace_back([this] { loop(); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(m_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(m_);
      tasks_.push_back(std::move(task));
      ++pending_;
    }
    cv_.notify_one();
  }
  void wait_idle() {
    std::unique_lock lock(m_);
    idle_.wait(lock, [this] { return pending_ == 0; });
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(m_);
        cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
        if (tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop_front();
      }
      task();
      {
        std::lock_guard lock(m_);
        --pending_;
      }
      idle_.notify_all();
    }
  }

  std::mutex m_;
  std::condition_variable cv_, idle_;
  std::deque<std::function<void()>> tasks_;
  std::size_t pending_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

enum class JobStatus { Queued, Running, Done, Error };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Error: return "error";
  }
  return "error";
}

struct JobRecord {
  std::string id;
  std::string kind;  // analyze, train, merge
  JobStatus status = JobStatus::Queued;
  std::vector<std::string> artifacts;
  std::string error;
};

struct LabelItem {
  int frame_index = -1;  // -1 for the final screen
  std::string action;    // "final" for the final screen
  std::string screen_ref;
  std::optional<std::string> crop_ref;
  std::vector<std::pair<std::string, double>> screen_suggestions;
  std::vector<std::pair<std::string, double>> widget_suggestions;
};

struct LabelSession {
  std::mutex m;
  std::string id, recording_id, usage_id, app_id;
  std::vector<LabelItem> items;
  std::vector<ActionKind> actions;  // per non-final item
  std::size_t cursor = 0;
  std::vector<std::pair<std::string, std::optional<std::string>>> labels;
  std::optional<std::string> model_id;
};

struct GenEntry {
  std::mutex m;
  std::string id, usage_id, adapter_ref;
  std::unique_ptr<GenerationSession> session;
  int shots = 0;
  std::string screenshot_ref;
};

/// One in-flight or finished idempotent request.
struct TokenEntry {
  std::mutex m;
  bool done = false;
  Reply reply;
};

}  // namespace

struct Service::Impl {
  explicit Impl(ServiceConfig c)
      : config(std::move(c)),
        ws(config.data_root, config.taxonomy_path),
        extractor(make_text_extractor(config.ocr_command)),
        pool(config.workers) {
    fs::create_directories(config.data_root);
    routes();
  }

  ServiceConfig config;
  Workspace ws;
  std::shared_ptr<const TextExtraction> extractor;
  httplib::Server server;
  WorkerPool pool;

  std::mutex state_m;  // guards the maps below, never held while working
  std::map<std::string, JobRecord> jobs;
  std::map<std::string, std::shared_ptr<const RecordingAnalysis>> analyses;
  std::map<std::string, std::string> recording_job;
  std::map<std::string, std::shared_ptr<LabelSession>> label_sessions;
  std::map<std::string, std::shared_ptr<GenEntry>> gen_sessions;
  std::map<std::string, std::shared_ptr<TokenEntry>> tokens;
  std::atomic<int> next_id{1};

  std::string fresh(const char* prefix) { return std::string(prefix) + "-" + std::to_string(next_id++); }

  // ------------------------------------------------------------ plumbing

  static json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      json j = json::parse(req.body);
      if (!j.is_object()) http_fail(400, "BadRequest", "request body must be a JSON object");
      return j;
    } catch (const json::exception& e) {
      http_fail(400, "BadRequest", std::string("malformed JSON: ") + e.what());
    }
  }

  static std::string str_field(const json& body, const char* key, bool required = true) {
    if (!body.contains(key) || body[key].is_null()) {
      if (required) http_fail(422, "InvalidInput", std::string("missing field '") + key + "'");
      return {};
    }
    if (!body[key].is_string()) http_fail(422, "InvalidInput", std::string("field '") + key + "' must be a string");
    return body[key].get<std::string>();
  }

  static void send(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  /// Runs `fn` converting failures to JSON errors. Mutating routes pass the
  /// request token so a retry replays the first reply.
  void handle(const httplib::Request& req, httplib::Response& res, bool mutating,
              const std::function<Reply(const json&)>& fn) {
    auto run = [&]() -> Reply {
      try {
        return fn(mutating ? parse_body(req) : json::object());
      } catch (const HttpError& e) {
        return {e.status, {{"error", e.code}, {"message", e.message}}};
      } catch (const Error& e) {
        return {status_for(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}};
      } catch (const std::exception& e) {
        return {500, {{"error", "Internal"}, {"message", e.what()}}};
      }
    };
    std::string token = req.get_header_value("Idempotency-Key");
    if (token.empty() && mutating && !req.body.empty()) {
      try {
        json j = json::parse(req.body);
        if (j.is_object() && j.contains("request_token") && j["request_token"].is_string())
          token = j["request_token"].get<std::string>();
      } catch (const json::exception&) {
      }
    }
    if (!mutating || token.empty()) {
      send(res, run());
      return;
    }
    std::shared_ptr<TokenEntry> entry;
    bool owner = false;
    {
      std::lock_guard lock(state_m);
      auto& slot = tokens[req.method + " " + req.path + " " + token];
      if (!slot) {
        slot = std::make_shared<TokenEntry>();
        owner = true;
      }
      entry = slot;
    }
    std::lock_guard lock(entry->m);
    if (owner || !entry->done) {
      entry->reply = run();
      entry->done = true;
    }
    send(res, entry->reply);
  }

  template <class T>
  std::shared_ptr<T> find(std::map<std::string, std::shared_ptr<T>>& m, const std::string& id, const char* what) {
    std::lock_guard lock(state_m);
    auto it = m.find(id);
    if (it == m.end()) http_fail(404, "NotFound", std::string("unknown ") + what + " '" + id + "'");
    return it->second;
  }

  // ------------------------------------------------------------ jobs

  json job_json(const JobRecord& j) {
    json out = {{"job_id", j.id}, {"kind", j.kind}, {"status", to_string(j.status)}, {"artifacts", j.artifacts}};
    if (!j.error.empty()) out["error"] = j.error;
    return out;
  }

  std::string start_job(const std::string& kind, std::function<std::vector<std::string>()> work) {
    std::string id;
    {
      std::lock_guard lock(state_m);
      id = "job-" + std::to_string(next_id++);
      jobs[id] = {id, kind, JobStatus::Queued, {}, {}};
    }
    pool.submit([this, id, work = std::move(work)] {
      {
        std::lock_guard lock(state_m);
        jobs[id].status = JobStatus::Running;
      }
      std::vector<std::string> artifacts;
      std::string error;
      try {
        artifacts = work();
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(state_m);
      auto& j = jobs[id];
      j.artifacts = std::move(artifacts);
      j.error = error;
      j.status = error.empty() ? JobStatus::Done : JobStatus::Error;
    });
    return id;
  }

  // ------------------------------------------------------------ recordings

  Reply post_recording(const json& body) {
    std::string id = str_field(body, "recording_id", false);
    if (id.empty()) id = fresh("rec");
    if (!is_safe_identifier(id)) http_fail(422, "InvalidInput", "bad recording id '" + id + "'");
    if (!body.contains("manifest") || !body["manifest"].is_object())
      http_fail(422, "InvalidInput", "missing object field 'manifest'");
    const json& m = body["manifest"];
    RecordingManifest manifest;
    manifest.recording_id = id;
    manifest.app_id = str_field(m, "app_id");
    manifest.usage_id = str_field(m, "usage_id");
    if (m.contains("fps")) {
      if (!m["fps"].is_number() || m["fps"].get<double>() <= 0)
        http_fail(422, "InvalidInput", "manifest.fps must be a positive number");
      manifest.fps = m["fps"].get<double>();
    }
    std::vector<fs::path> files;
    if (body.contains("frames_dir")) {
      const fs::path dir = str_field(body, "frames_dir");
      if (!fs::is_directory(dir)) http_fail(422, "InvalidInput", "frames_dir '" + dir.string() + "' is not a directory");
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else if (body.contains("frames") && body["frames"].is_array()) {
      for (const auto& f : body["frames"]) {
        if (!f.is_string()) http_fail(422, "InvalidInput", "frames must be file paths");
        files.emplace_back(f.get<std::string>());
        if (!fs::is_regular_file(files.back())) http_fail(422, "InvalidInput", "no frame file '" + f.get<std::string>() + "'");
      }
    } else {
      http_fail(422, "InvalidInput", "give frames_dir or a frames array");
    }
    if (files.empty()) http_fail(422, "EmptyRecording", "recording has no frames");

    const fs::path dir = ws.recording_dir(id);
    {
      std::lock_guard lock(state_m);
      if (recording_job.count(id) || fs::exists(dir)) http_fail(409, "Conflict", "recording '" + id + "' exists");
      recording_job[id] = "";
    }
    fs::create_directories(dir / "frames");
    for (std::size_t i = 0; i < files.size(); ++i) fs::copy_file(files[i], dir / "frames" / frame_name(static_cast<int>(i)));
    {
      std::ofstream out(dir / "recording.toml");
      out << manifest.to_toml();
    }
    const std::string job = start_job("analyze", [this, id] { return analyze(id); });
    {
      std::lock_guard lock(state_m);
      recording_job[id] = job;
    }
    return {202, {{"job_id", job}, {"recording_id", id}}};
  }

  std::vector<std::string> analyze(const std::string& id) {
    auto a = std::make_shared<RecordingAnalysis>(analyze_recording_dir(ws.recording_dir(id), *extractor));
    write_analysis(*a, ws.analysis_dir(id));
    {
      std::lock_guard lock(state_m);
      analyses[id] = a;
    }
    const std::string base = "/assets/analysis/" + id + "/";
    return {base + "events.json", base + "gui_events.json"};
  }

  /// The analysis of a recording known to this service or found on disk.
  std::shared_ptr<const RecordingAnalysis> analysis_of(const std::string& id) {
    {
      std::lock_guard lock(state_m);
      if (auto it = analyses.find(id); it != analyses.end()) return it->second;
      if (auto it = recording_job.find(id); it != recording_job.end()) {
        auto j = jobs.find(it->second);
        if (j == jobs.end() || j->second.status != JobStatus::Error)
          http_fail(409, "NotReady", "analysis of '" + id + "' has not finished");
        http_fail(409, "AnalysisFailed", j->second.error);
      }
    }
    if (!is_safe_identifier(id) || !fs::is_directory(ws.recording_dir(id)))
      http_fail(404, "NotFound", "unknown recording '" + id + "'");
    analyze(id);
    std::lock_guard lock(state_m);
    return analyses.at(id);
  }

  Reply get_events(const std::string& id) {
    if (!is_safe_identifier(id)) http_fail(404, "NotFound", "unknown recording '" + id + "'");
    auto a = analysis_of(id);
    return {200, json::parse(events_json(a->events))};
  }

  // ------------------------------------------------------------ label sessions

  json item_json(const LabelSession& s) {
    json out = {{"session_id", s.id}, {"recording_id", s.recording_id}, {"usage_id", s.usage_id},
                {"cursor", s.cursor}, {"total", s.items.size()}, {"done", s.cursor >= s.items.size()}};
    if (s.model_id) out["model_id"] = *s.model_id;
    if (s.cursor < s.items.size()) {
      const auto& it = s.items[s.cursor];
      out["item"] = {{"index", s.cursor},
                     {"frame_index", it.frame_index},
                     {"action", it.action},
                     {"screen", it.screen_ref},
                     {"widget_crop", it.crop_ref ? json(*it.crop_ref) : json(nullptr)},
                     {"screen_suggestions", suggestions_json(it.screen_suggestions)},
                     {"widget_suggestions", suggestions_json(it.widget_suggestions)}};
    }
    return out;
  }

  Reply post_label_session(const json& body) {
    const std::string rec = str_field(body, "recording_id");
    const std::string usage = str_field(body, "usage_id");
    if (!is_safe_identifier(usage)) http_fail(422, "InvalidInput", "bad usage id '" + usage + "'");
    if (!is_safe_identifier(rec)) http_fail(404, "NotFound", "unknown recording '" + rec + "'");
    auto a = analysis_of(rec);
    auto screens = ws.classifier("screen");
    auto widgets = ws.classifier("widget");
    const std::size_t k = config.suggestions;
    auto top = [&](const std::shared_ptr<const ClassifierModel>& c, const FeatureVector& f) {
      return c ? c->predict_topk(f, k).entries : std::vector<std::pair<std::string, double>>{};
    };

    auto s = std::make_shared<LabelSession>();
    s->id = fresh("label");
    s->recording_id = rec;
    s->usage_id = usage;
    s->app_id = a->manifest.app_id;
    const std::string base = "/assets/analysis/" + rec + "/";
    for (const auto& e : a->kept) {
      LabelItem item;
      item.frame_index = e.gui.frame_index;
      item.action = std::string(to_string(e.gui.action.kind));
      item.screen_ref = base + "screens/" + frame_name(e.gui.frame_index);
      item.screen_suggestions = top(screens, e.screen_features);
      if (e.gui.widget) {
        item.crop_ref = base + "crops/" + frame_name(e.gui.frame_index);
        if (widgets && !item.screen_suggestions.empty())
          item.widget_suggestions =
              top(widgets, widget_features(*e.gui.widget, item.screen_suggestions.front().first, ws.taxonomy()));
      }
      s->items.push_back(std::move(item));
      s->actions.push_back(e.gui.action.kind);
    }
    LabelItem fin;
    fin.action = "final";
    fin.screen_ref = base + "final.png";
    fin.screen_suggestions = top(screens, a->final_features);
    s->items.push_back(std::move(fin));
    {
      std::lock_guard lock(state_m);
      label_sessions[s->id] = s;
    }
    std::lock_guard lock(s->m);
    return {201, item_json(*s)};
  }

  Reply label_choice(const std::string& id, const json& body) {
    auto s = find(label_sessions, id, "label session");
    std::lock_guard lock(s->m);
    if (s->cursor >= s->items.size()) http_fail(409, "Conflict", "label session is complete");
    const std::string screen = str_field(body, "screen_label");
    if (!ws.taxonomy().has_screen(screen)) http_fail(422, "UnknownCategory", "'" + screen + "' is not a screen category");
    const auto& item = s->items[s->cursor];
    std::optional<std::string> widget;
    if (item.crop_ref) {
      const std::string w = str_field(body, "widget_label");
      if (!ws.taxonomy().has_widget(w)) http_fail(422, "UnknownCategory", "'" + w + "' is not a widget category");
      widget = w;
    }
    s->labels.emplace_back(screen, widget);
    ++s->cursor;
    if (s->cursor == s->items.size()) {
      LabeledTrace trace;
      trace.usage_id = s->usage_id;
      trace.source = {s->app_id, s->recording_id};
      for (std::size_t i = 0; i + 1 < s->labels.size(); ++i)
        trace.steps.push_back({s->labels[i].first, s->labels[i].second, s->actions[i]});
      trace.final_screen = s->labels.back().first;
      try {
        IrModel model = build_model(trace, ws.taxonomy());
        s->model_id = ws.models().store(model);
      } catch (...) {
        --s->cursor;
        s->labels.pop_back();
        throw;
      }
      fs::create_directories(ws.trace_path(s->recording_id).parent_path());
      std::ofstream(ws.trace_path(s->recording_id)) << trace_to_json(trace);
    }
    return {200, item_json(*s)};
  }

  // ------------------------------------------------------------ models

  Reply get_models(const httplib::Request& req) {
    std::optional<std::string> usage;
    if (req.has_param("usage")) usage = req.get_param_value("usage");
    json arr = json::array();
    for (const auto& m : ws.models().list(usage)) {
      json prov = json::array();
      for (const auto& p : m.provenance) prov.push_back({{"app_id", p.app_id}, {"recording_id", p.recording_id}});
      arr.push_back({{"model_id", m.model_id}, {"usage_id", m.usage_id}, {"provenance", prov}});
    }
    return {200, {{"models", arr}}};
  }

  Reply get_model(const std::string& id) {
    IrModel m;
    try {
      m = ws.models().load(id);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) http_fail(404, "NotFound", "unknown model '" + id + "'");
      throw;
    }
    return {200, model_json(id, m)};
  }

  static json model_json(const std::string& id, const IrModel& m) {
    json states = json::array(), trans = json::array();
    for (const auto& s : m.states()) states.push_back({{"name", s.name}, {"start", s.is_start}, {"end", s.is_end}});
    for (const auto& t : m.transitions()) trans.push_back(transition_json(t));
    return {{"model_id", id}, {"usage_id", m.usage_id()}, {"states", states}, {"transitions", trans}};
  }

  Reply merge(const json& body) {
    const std::string usage = str_field(body, "usage_id");
    if (!is_safe_identifier(usage)) http_fail(422, "InvalidInput", "bad usage id '" + usage + "'");
    IrModel m = ws.models().merged(usage);
    const std::string model_id = "merged/" + usage;
    std::string job;
    {
      std::lock_guard lock(state_m);
      job = "job-" + std::to_string(next_id++);
      jobs[job] = {job, "merge", JobStatus::Done, {model_id}, {}};
    }
    json out = model_json(model_id, m);
    out["job_id"] = job;
    return {200, out};
  }

  Reply train_classifier(const json& body) {
    const std::string target = str_field(body, "target");
    const fs::path out = ws.classifier_path(target);
    const fs::path dataset = str_field(body, "dataset");
    if (!fs::is_regular_file(dataset)) http_fail(422, "InvalidInput", "no dataset file '" + dataset.string() + "'");
    const ModelKind kind = parse_model_kind(body.value("kind", std::string("knn")));
    const std::string job = start_job("train", [dataset, kind, out, target] {
      auto examples = load_dataset(dataset);
      fs::create_directories(out.parent_path());
      train(examples, kind).save(out);
      return std::vector<std::string>{"classifiers/" + target + ".model"};
    });
    return {202, {{"job_id", job}}};
  }

  // ------------------------------------------------------------ generation sessions

  json gen_json(GenEntry& g) {
    const GenerationSession& s = *g.session;
    json recs = json::array();
    for (const auto& r : s.recommendations()) {
      json item = {{"widget_id", r.widget_id}, {"tier", r.tier},
                   {"confidence", r.confidence}, {"transition", transition_json(r.transition)}};
      if (const DeviceWidget* w = s.device_state().widget(r.widget_id)) {
        const auto& b = w->widget.element.box;
        item["box"] = {b.x, b.y, b.w, b.h};
        item["text"] = w->widget.element.text;
      }
      recs.push_back(std::move(item));
    }
    json out = {{"session_id", g.id},
                {"usage_id", g.usage_id},
                {"status", to_string(s.status())},
                {"screenshot", g.screenshot_ref},
                {"device_screen", s.device_state().screen_id},
                {"screen_suggestions", suggestions_json(s.screen_suggestions())},
                {"current_state", s.current_state() ? json(*s.current_state()) : json(nullptr)},
                {"recommendations", recs},
                {"events", s.script().events.size()}};
    if (!s.failure().empty()) out["failure"] = s.failure();
    if (s.script().final_screen) out["final_screen"] = *s.script().final_screen;
    return out;
  }

  void snapshot(GenEntry& g) {
    const fs::path dir = ws.root() / "gen" / g.id;
    fs::create_directories(dir);
    const std::string name = frame_name(g.shots++);
    if (!cv::imwrite((dir / name).string(), g.session->device_state().screenshot))
      throw Error(ErrorCode::IoError, "cannot write screenshot");
    g.screenshot_ref = "/assets/gen/" + g.id + "/" + name;
  }

  Reply post_gen_session(const json& body) {
    const std::string usage = str_field(body, "usage_id");
    const std::string ref = str_field(body, "adapter_ref");
    if (!is_safe_identifier(usage)) http_fail(422, "InvalidInput", "bad usage id '" + usage + "'");
    GenerationConfig cfg;
    auto positive = [&](const char* key, std::size_t& dst) {
      if (!body.contains(key)) return;
      if (!body[key].is_number_integer() || body[key].get<long>() < 1)
        http_fail(422, "InvalidInput", std::string("'") + key + "' must be a positive integer");
      dst = body[key].get<std::size_t>();
    };
    positive("k", cfg.screen_top_k);
    positive("rec_threshold", cfg.match.rec_threshold);
    cfg.match.top_k = cfg.screen_top_k;
    IrModel model = ws.models().merged(usage);
    auto screens = ws.classifier("screen");
    if (!screens) http_fail(409, "NotReady", "no screen classifier; train one first");
    SessionDeps deps{ws.make_adapter(ref), screens, ws.classifier("widget"), extractor, &ws.taxonomy()};
    auto g = std::make_shared<GenEntry>();
    g->id = fresh("gen");
    g->usage_id = usage;
    g->adapter_ref = ref;
    const std::string app_id = body.value("app_id", ref.substr(ref.find(':') + 1));
    g->session = std::make_unique<GenerationSession>(app_id, std::move(model), std::move(deps), cfg);
    snapshot(*g);
    {
      std::lock_guard lock(state_m);
      gen_sessions[g->id] = g;
    }
    std::lock_guard lock(g->m);
    return {201, gen_json(*g)};
  }

  Reply gen_choice(const std::string& id, const json& body) {
    auto g = find(gen_sessions, id, "generation session");
    std::lock_guard lock(g->m);
    GenerationSession& s = *g->session;
    const int given = body.contains("screen_label") + body.contains("widget_id") + body.contains("text");
    if (given != 1) http_fail(422, "InvalidInput", "give exactly one of screen_label, widget_id, text");
    const auto status = s.status();
    auto expect = [&](SessionStatus want, const char* field) {
      if (status != want)
        http_fail(409, "Conflict",
                  std::string("'") + field + "' does not fit session status " + std::string(to_string(status)));
    };
    try {
      if (body.contains("screen_label")) {
        expect(SessionStatus::AwaitingScreenChoice, "screen_label");
        const std::string label = str_field(body, "screen_label");
        if (!ws.taxonomy().has_screen(label))
          http_fail(422, "UnknownCategory", "'" + label + "' is not a screen category");
        s.choose_screen(label);
      } else if (body.contains("widget_id")) {
        expect(SessionStatus::AwaitingWidgetChoice, "widget_id");
        s.choose_widget(str_field(body, "widget_id"));
      } else {
        expect(SessionStatus::AwaitingTextInput, "text");
        s.provide_text(str_field(body, "text"));
      }
    } catch (const Error& e) {
      if (s.status() != SessionStatus::Failed) throw;
    }
    snapshot(*g);
    return {200, gen_json(*g)};
  }

  // ------------------------------------------------------------ assets

  void asset(const httplib::Request& req, httplib::Response& res) {
    const fs::path rel = fs::path(req.matches[1].str()).lexically_normal();
    const std::string first = rel.begin() == rel.end() ? "" : rel.begin()->string();
    bool ok = first == "analysis" || first == "recordings" || first == "gen";
    for (const auto& part : rel)
      if (part == ".." || part == ".") ok = false;
    const fs::path p = ws.root() / rel;
    if (!ok || !fs::is_regular_file(p)) {
      send(res, {404, {{"error", "NotFound"}, {"message", "no asset '" + rel.string() + "'"}}});
      return;
    }
    res.set_content(read_all(p), content_type_for(p));
  }

  // ------------------------------------------------------------ routes

  void routes() {
    using Req = httplib::Request;
    using Res = httplib::Response;
    server.Post("/recordings", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return post_recording(b); });
    });
    server.Get("/jobs/:id", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        std::lock_guard lock(state_m);
        auto it = jobs.find(q.path_params.at("id"));
        if (it == jobs.end()) http_fail(404, "NotFound", "unknown job '" + q.path_params.at("id") + "'");
        return {200, job_json(it->second)};
      });
    });
    server.Get("/recordings/:id/events", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) { return get_events(q.path_params.at("id")); });
    });
    server.Post("/label-sessions", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return post_label_session(b); });
    });
    server.Get("/label-sessions/:id", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        auto s = find(label_sessions, q.path_params.at("id"), "label session");
        std::lock_guard lock(s->m);
        return {200, item_json(*s)};
      });
    });
    server.Get("/label-sessions/:id/next", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        auto s = find(label_sessions, q.path_params.at("id"), "label session");
        std::lock_guard lock(s->m);
        return {200, item_json(*s)};
      });
    });
    server.Post("/label-sessions/:id/choice", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return label_choice(q.path_params.at("id"), b); });
    });
    server.Get("/models", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) { return get_models(q); });
    });
    server.Get(R"(/models/([A-Za-z0-9_.\-]+(?:/[A-Za-z0-9_.\-]+)?))", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        const std::string id = q.matches[1].str();
        if (id.rfind("merged/", 0) == 0) return {200, model_json(id, ws.models().merged(id.substr(7)))};
        return get_model(id);
      });
    });
    server.Post("/models/merge", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return merge(b); });
    });
    server.Post("/classifiers/train", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return train_classifier(b); });
    });
    server.Post("/gen-sessions", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return post_gen_session(b); });
    });
    server.Get("/gen-sessions/:id", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        auto g = find(gen_sessions, q.path_params.at("id"), "generation session");
        std::lock_guard lock(g->m);
        return {200, gen_json(*g)};
      });
    });
    server.Post("/gen-sessions/:id/choice", [this](const Req& q, Res& r) {
      handle(q, r, true, [&](const json& b) { return gen_choice(q.path_params.at("id"), b); });
    });
    server.Get("/gen-sessions/:id/script", [this](const Req& q, Res& r) {
      handle(q, r, false, [&](const json&) -> Reply {
        auto g = find(gen_sessions, q.path_params.at("id"), "generation session");
        std::lock_guard lock(g->m);
        return {200, json::parse(g->session->script().to_json())};
      });
    });
    server.Get(R"(/assets/(.+))", [this](const Req& q, Res& r) { asset(q, r); });
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_for_jobs() { impl_->pool.wait_idle(); }

}  // namespace ugen
