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

// ugen command line: one subcommand per pipeline stage.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ugen/error.hpp"
#include "ugen/eval.hpp"
#include "ugen/pipeline.hpp"
#include "ugen/service.hpp"
#include "ugen/testgen.hpp"
#include "ugen/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ugen;

namespace {

struct Globals {
  fs::path root = ".";
  std::optional<fs::path> taxonomy;
  std::optional<std::string> ocr_command;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, p.string() + ": cannot read");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, p.string() + ": cannot write");
}

/// Re-raises errors from `fn` with the file name in front.
template <class Fn>
auto from_file(const fs::path& p, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    if (msg.find(p.string()) != std::string::npos) throw;
    throw Error(e.code(), p.string() + ": " + msg);
  }
}

std::vector<int> parse_ks(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      int k = std::stoi(part, &used);
      if (used != part.size() || k < 1) throw std::invalid_argument(part);
      ks.push_back(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, "--k: '" + part + "' is not a positive integer");
    }
  }
  if (ks.empty()) throw Error(ErrorCode::InvalidInput, "--k: empty list");
  return ks;
}

fs::path recording_path(const Workspace& ws, const std::string& ref) {
  if (fs::is_directory(ref)) return ref;
  if (is_safe_identifier(ref) && fs::is_directory(ws.recording_dir(ref))) return ws.recording_dir(ref);
  throw Error(ErrorCode::IoError, "no recording directory '" + ref + "'");
}

std::shared_ptr<const ClassifierModel> require_classifier(const Workspace& ws, const std::string& target) {
  auto c = from_file(ws.classifier_path(target), [&] { return ws.classifier(target); });
  if (!c) throw Error(ErrorCode::IoError, ws.classifier_path(target).string() + ": missing; run train first");
  return c;
}

/// Merge of the usage's stored models, leaving out those recorded on `app_id`.
IrModel held_out_model(const ModelDatabase& db, const std::string& usage, const std::string& app_id) {
  std::vector<IrModel> models;
  for (const auto& info : db.list(usage)) {
    bool own = false;
    for (const auto& p : info.provenance) own = own || p.app_id == app_id;
    if (!own) models.push_back(db.load(info.model_id));
  }
  if (models.empty())
    throw Error(ErrorCode::NoModelForUsage, "no model for usage '" + usage + "' outside app '" + app_id + "'");
  return merge_models(models);
}

json result_json(const OracleResult& r, const std::string& app_id, bool with_oracle) {
  return {{"app_id", app_id},
          {"usage_id", r.script.usage_id},
          {"status", std::string(to_string(r.status))},
          {"accomplished", with_oracle ? json(r.accomplished) : json(nullptr)},
          {"failure", r.failure},
          {"visited_screens", r.visited_screens}};
}

/// Directories holding script.json: `dir` itself and its direct children.
std::vector<fs::path> run_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  if (fs::exists(dir / "script.json")) out.push_back(dir);
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "script.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LabeledTrace> load_traces(const fs::path& dir) {
  std::vector<LabeledTrace> out;
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(from_file(f, [&] { return trace_from_json(read_file(f)); }));
  return out;
}

std::atomic<Service*> g_service{nullptr};

extern "C" void on_signal(int) {
  if (Service* s = g_service.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Usage-model test generation from screen recordings"};
  app.require_subcommand(1);
  Globals g;
  std::string root_text = ".";
  if (const char* env = std::getenv("UGEN_DATA_ROOT")) root_text = env;
  std::string taxonomy_text, ocr_text;
  app.add_option("--root", root_text, "Data root (env UGEN_DATA_ROOT)")->capture_default_str();
  app.add_option("--taxonomy", taxonomy_text, "Taxonomy JSON (default: <root>/taxonomy.json or built-in)");
  app.add_option("--ocr-command", ocr_text, "External text extractor command (default: built-in glyph reader)");

  std::function<int()> action;

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Event frames, GUI events, crops and abstractions of recordings");
  std::vector<std::string> an_dirs;
  std::string an_out;
  int an_jobs = 1;
  analyze->add_option("recording-dirs", an_dirs, "Recording directories (frames/ + recording.toml)")->required();
  analyze->add_option("--out", an_out, "Output directory (one recording only; default <root>/analysis/<id>)");
  analyze->add_option("--jobs", an_jobs, "Recordings analysed in parallel")->check(CLI::PositiveNumber);
  analyze->callback([&] {
    action = [&] {
      if (!an_out.empty() && an_dirs.size() != 1)
        throw Error(ErrorCode::InvalidInput, "--out needs exactly one recording directory");
      Workspace ws(g.root, g.taxonomy);
      auto ocr = make_text_extractor(g.ocr_command);
      std::vector<std::string> lines(an_dirs.size());
      std::vector<std::exception_ptr> errors(an_dirs.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i; (i = next++) < an_dirs.size();) {
          try {
            const fs::path dir = an_dirs[i];
            auto a = from_file(dir, [&] { return analyze_recording_dir(dir, *ocr); });
            const fs::path out = an_out.empty() ? ws.analysis_dir(a.manifest.recording_id) : fs::path(an_out);
            write_analysis(a, out);
            lines[i] = a.manifest.recording_id + "\t" + std::to_string(a.events.size()) + " events\t" +
                       std::to_string(a.kept.size()) + " kept\t" + out.string();
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int t = 1; t < an_jobs && t < static_cast<int>(an_dirs.size()); ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();
      for (std::size_t i = 0; i < an_dirs.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        std::cout << lines[i] << "\n";
      }
      return 0;
    };
  });

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "Synthetic scripted apps and recordings");
  fixtures->require_subcommand(1);
  auto* fx_gen = fixtures->add_subcommand("generate", "Render a fixture spec into a data root");
  std::string fx_spec, fx_out;
  fx_gen->add_option("spec", fx_spec, "Fixture spec JSON")->required()->check(CLI::ExistingFile);
  fx_gen->add_option("--out", fx_out, "Output root (default --root)");
  fx_gen->callback([&] {
    action = [&] {
      FixtureSpec spec = from_file(fx_spec, [&] { return FixtureSpec::load(fx_spec); });
      Workspace ws(g.root, g.taxonomy);
      auto ocr = make_text_extractor(g.ocr_command);
      FixtureSet set = from_file(fx_spec, [&] { return generate_fixtures(spec, ws.taxonomy(), *ocr); });
      const fs::path out = fx_out.empty() ? g.root : fs::path(fx_out);
      write_fixtures(set, spec, out);
      std::cout << set.recordings.size() << " recordings, " << set.screen_examples.size() << " screen and "
                << set.widget_examples.size() << " widget examples in " << out.string() << "\n";
      return 0;
    };
  });
  auto* fx_default = fixtures->add_subcommand("default-spec", "Write the built-in five-app fixture spec");
  std::uint64_t fx_seed = 7;
  bool fx_unmatchable = false;
  std::string fx_spec_out;
  fx_default->add_option("--seed", fx_seed, "Fixture seed")->capture_default_str();
  fx_default->add_flag("--unmatchable", fx_unmatchable, "Give the last app a usage path no other app shows");
  fx_default->add_option("--out", fx_spec_out, "Spec file (default stdout)");
  fx_default->callback([&] {
    action = [&] {
      const std::string text = default_fixture_spec(fx_seed, fx_unmatchable).to_json();
      if (fx_spec_out.empty()) std::cout << text << "\n";
      else write_file(fx_spec_out, text);
      return 0;
    };
  });

  // train
  auto* trainc = app.add_subcommand("train", "Train a screen or widget classifier");
  std::string tr_kind = "knn", tr_target, tr_dataset, tr_out;
  Hyperparams tr_hyper;
  trainc->add_option("--kind", tr_kind, "knn or linear")->capture_default_str();
  trainc->add_option("--target", tr_target, "screen or widget")->required();
  trainc->add_option("dataset", tr_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  trainc->add_option("--out", tr_out, "Model file (default <root>/classifiers/<target>.model)");
  trainc->add_option("--seed", tr_hyper.seed, "Training seed")->capture_default_str();
  trainc->add_option("--knn-k", tr_hyper.knn_k, "Neighbours")->capture_default_str();
  trainc->callback([&] {
    action = [&] {
      Workspace ws(g.root, g.taxonomy);
      const ModelKind kind = parse_model_kind(tr_kind);
      const fs::path out = tr_out.empty() ? ws.classifier_path(tr_target) : fs::path(tr_out);
      auto examples = from_file(tr_dataset, [&] { return load_dataset(tr_dataset); });
      auto model = from_file(tr_dataset, [&] { return train(examples, kind, tr_hyper, ws.taxonomy().version()); });
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      model.save(out);
      std::cout << out.string() << "\n";
      return 0;
    };
  });

  // eval-classifier
  auto* evalc = app.add_subcommand("eval-classifier", "Leave-one-app-out classifier accuracy");
  std::string ev_dataset, ev_kind = "knn", ev_ks = "1,5", ev_out;
  bool ev_loo = false;
  Hyperparams ev_hyper;
  evalc->add_flag("--loo", ev_loo, "Leave one app out (the only protocol)")->required();
  evalc->add_option("dataset", ev_dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  evalc->add_option("--kind", ev_kind, "knn or linear")->capture_default_str();
  evalc->add_option("--k", ev_ks, "Comma-separated top-k values")->capture_default_str();
  evalc->add_option("--seed", ev_hyper.seed, "Training seed")->capture_default_str();
  evalc->add_option("--out", ev_out, "CSV file (default stdout)");
  evalc->callback([&] {
    action = [&] {
      auto examples = from_file(ev_dataset, [&] { return load_dataset(ev_dataset); });
      auto rows = from_file(ev_dataset, [&] {
        return evaluate_leave_one_app_out(examples, parse_model_kind(ev_kind), parse_ks(ev_ks), ev_hyper);
      });
      const std::string csv = accuracy_csv(rows);
      if (ev_out.empty()) std::cout << csv;
      else write_file(ev_out, csv);
      return 0;
    };
  });

  // label
  auto* label = app.add_subcommand("label", "Label a recording and store its usage model");
  std::string lb_rec, lb_usage;
  bool lb_auto = false;
  label->add_flag("--auto-top1", lb_auto, "Accept the first suggestion for every item")->required();
  label->add_option("recording", lb_rec, "Recording directory or id under <root>/recordings")->required();
  label->add_option("--usage", lb_usage, "Usage id (default from recording.toml)");
  label->callback([&] {
    action = [&] {
      Workspace ws(g.root, g.taxonomy);
      auto ocr = make_text_extractor(g.ocr_command);
      const fs::path dir = recording_path(ws, lb_rec);
      auto a = from_file(dir, [&] { return analyze_recording_dir(dir, *ocr); });
      if (!lb_usage.empty()) a.manifest.usage_id = lb_usage;
      if (a.manifest.usage_id.empty())
        throw Error(ErrorCode::InvalidInput, (dir / "recording.toml").string() + ": usage_id is missing; pass --usage");
      auto screens = require_classifier(ws, "screen");
      auto widgets = require_classifier(ws, "widget");
      LabeledTrace trace = auto_label(a, *screens, *widgets, ws.taxonomy());
      IrModel model = build_model(trace, ws.taxonomy());
      const std::string id = ws.models().store(model);
      write_file(ws.trace_path(a.manifest.recording_id), trace_to_json(trace));
      std::cout << id << "\n";
      return 0;
    };
  });

  // merge
  auto* mergec = app.add_subcommand("merge", "Merge every stored model of a usage");
  std::string mg_usage;
  mergec->add_option("--usage", mg_usage, "Usage id")->required();
  mergec->callback([&] {
    action = [&] {
      Workspace ws(g.root, g.taxonomy);
      IrModel m = ws.models().merged(mg_usage);
      std::cout << "merged/" << mg_usage << "\t" << m.states().size() << " states\t" << m.transitions().size()
                << " transitions\n";
      return 0;
    };
  });

  // generate
  auto* gen = app.add_subcommand("generate", "Headless guided test generation on a scripted app");
  std::string gn_usage, gn_adapter, gn_oracle, gn_run, gn_app;
  bool gn_own = false;
  GenerationConfig gn_cfg;
  gen->add_option("--usage", gn_usage, "Usage id")->required();
  gen->add_option("--adapter", gn_adapter, "script:<app file or id> or process:<command>")->required();
  gen->add_option("--oracle", gn_oracle, "Ground-truth JSON choosing screens, widgets and text")->check(CLI::ExistingFile);
  gen->add_option("--app-id", gn_app, "Target app id (default from the adapter reference)");
  gen->add_option("--run", gn_run, "Run directory (default <root>/runs/<usage>-<app>)");
  gen->add_option("--k", gn_cfg.screen_top_k, "Screen suggestions and tier-3 depth")->capture_default_str();
  gen->add_option("--rec-threshold", gn_cfg.match.rec_threshold, "Candidates that stop tier expansion")
      ->capture_default_str();
  gen->add_flag("--include-own-app", gn_own, "Also merge models recorded on the target app");
  gen->callback([&] {
    action = [&] {
      Workspace ws(g.root, g.taxonomy);
      gn_cfg.match.top_k = gn_cfg.screen_top_k;
      auto adapter = ws.make_adapter(gn_adapter);
      std::string app_id = gn_app;
      if (app_id.empty()) {
        app_id = fs::path(gn_adapter.substr(gn_adapter.find(':') + 1)).stem().string();
        if (auto* s = dynamic_cast<ScriptedAdapter*>(adapter.get())) app_id = s->app().app_id;
      }
      OracleTrace truth;
      truth.usage_id = gn_usage;
      if (!gn_oracle.empty()) {
        GroundTruth gt = from_file(gn_oracle, [&] { return GroundTruth::parse(read_file(gn_oracle)); });
        if (gt.usage_id != gn_usage)
          throw Error(ErrorCode::UsageMismatch, gn_oracle + ": usage '" + gt.usage_id + "' is not '" + gn_usage + "'");
        truth = gt.oracle_trace();
      }
      IrModel model = gn_own ? ws.models().merged(gn_usage) : held_out_model(ws.models(), gn_usage, app_id);
      SessionDeps deps{adapter, require_classifier(ws, "screen"), ws.classifier("widget"),
                       make_text_extractor(g.ocr_command), &ws.taxonomy()};
      OracleResult r = run_oracle_session(app_id, model, truth, deps, gn_cfg);
      const fs::path run = gn_run.empty() ? ws.runs_dir() / (gn_usage + "-" + app_id) : fs::path(gn_run);
      write_file(run / "script.json", r.script.to_json());
      write_file(run / "steps.csv", step_log_csv(r.log));
      write_file(run / "result.json", result_json(r, app_id, !gn_oracle.empty()).dump(2));
      std::cout << app_id << "\t" << gn_usage << "\t" << to_string(r.status) << "\t" << r.script.events.size()
                << " events";
      if (!gn_oracle.empty()) std::cout << "\t" << (r.accomplished ? "accomplished" : "not accomplished");
      if (!r.failure.empty()) std::cout << "\t" << r.failure;
      std::cout << "\n";
      return 0;
    };
  });

  // report
  auto* report = app.add_subcommand("report", "Similarity of generated tests to labelled human traces");
  std::string rp_dir;
  report->add_option("run-dir", rp_dir, "Directory of generate outputs")->required()->check(CLI::ExistingDirectory);
  report->callback([&] {
    action = [&] {
      Workspace ws(g.root, g.taxonomy);
      auto humans_all = load_traces(ws.root() / "traces");
      std::vector<SimilarityRow> rows;
      std::vector<bool> accomplished;
      std::vector<std::vector<StepLogRow>> logs;
      for (const auto& entry : run_entries(rp_dir)) {
        const fs::path sp = entry / "script.json";
        TestScript script = from_file(sp, [&] { return TestScript::parse(read_file(sp)); });
        if (fs::exists(entry / "result.json")) {
          json r = from_file(entry / "result.json", [&] { return json::parse(read_file(entry / "result.json")); });
          if (r.contains("accomplished") && r["accomplished"].is_boolean())
            accomplished.push_back(r["accomplished"].get<bool>());
        }
        if (fs::exists(entry / "steps.csv"))
          logs.push_back(from_file(entry / "steps.csv", [&] { return parse_step_log_csv(read_file(entry / "steps.csv")); }));
        std::vector<LabeledTrace> humans;
        for (const auto& h : humans_all)
          if (h.usage_id == script.usage_id && h.source.app_id == script.app_id) humans.push_back(h);
        if (humans.empty()) {
          std::cerr << "ugen: " << sp.string() << ": no labelled trace of usage '" << script.usage_id << "' on app '"
                    << script.app_id << "'; skipped\n";
          continue;
        }
        SimilarityRow row = compute_similarity(script, humans);
        row.usage_id = script.usage_id + "@" + script.app_id;
        rows.push_back(std::move(row));
      }
      write_report(rows, fs::path(rp_dir) / "report.csv");
      json summary = {{"tests", rows.size()}};
      if (!accomplished.empty()) {
        summary["usage_success_rate"] = usage_success_rate(accomplished);
        summary["accomplished"] = std::count(accomplished.begin(), accomplished.end(), true);
        summary["sessions"] = accomplished.size();
      }
      std::size_t steps = 0;
      for (const auto& l : logs) steps += l.size();
      if (steps > 0) {
        auto acc = widget_recommendation_accuracy(logs);
        summary["widget_recommendation_accuracy"] = acc.accuracy;
        summary["widget_hits"] = acc.hits;
        summary["widget_steps"] = acc.total;
      }
      write_file(fs::path(rp_dir) / "summary.json", summary.dump(2));
      std::cout << report_table(rows);
      if (summary.contains("usage_success_rate"))
        std::cout << "usage success rate " << summary["usage_success_rate"].get<double>() << "\n";
      if (summary.contains("widget_recommendation_accuracy"))
        std::cout << "widget recommendation accuracy " << summary["widget_recommendation_accuracy"].get<double>()
                  << "\n";
      return 0;
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string sv_host = "127.0.0.1";
  int sv_port = 8080;
  std::size_t sv_workers = 2;
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--workers", sv_workers, "Background job threads")->capture_default_str();
  serve->callback([&] {
    action = [&] {
      Service service(ServiceConfig{g.root, g.taxonomy, g.ocr_command, sv_workers, 5});
      const int port = service.bind(sv_host, sv_port);
      std::cout << "listening on " << sv_host << ":" << port << std::endl;
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.run();
      g_service = nullptr;
      return 0;
    };
  });

  // adapter-serve
  auto* aserve = app.add_subcommand("adapter-serve", "Serve a scripted app over the adapter protocol on stdio");
  std::string as_app, as_scratch;
  aserve->add_option("app", as_app, "App script JSON")->required()->check(CLI::ExistingFile);
  aserve->add_option("--scratch", as_scratch, "Screenshot directory (default a temp dir)");
  aserve->callback([&] {
    action = [&] {
      ScriptedAdapter adapter(from_file(as_app, [&] { return AppScript::load(as_app); }));
      const fs::path scratch =
          as_scratch.empty() ? fs::temp_directory_path() / ("ugen-adapter-" + std::to_string(::getpid())) : fs::path(as_scratch);
      fs::create_directories(scratch);
      serve_adapter_protocol(adapter, std::cin, std::cout, scratch);
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    g.root = root_text;
    if (!taxonomy_text.empty()) g.taxonomy = fs::path(taxonomy_text);
    if (!ocr_text.empty()) g.ocr_command = ocr_text;
    return action ? action() : 2;
  } catch (const Error& e) {
    std::cerr << "ugen: " << e.what() << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << "ugen: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ugen: internal error: " << e.what() << "\n";
    return 3;
  }
}
