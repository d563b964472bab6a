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

#include "ugen/ir_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "ugen/error.hpp"

namespace ugen {

namespace fs = std::filesystem;

std::string to_string(const Transition& t) {
  return t.from + " " + t.widget.value_or("-") + " " + std::string(to_string(t.action)) + " " + t.to;
}

IrModel::IrModel(std::string usage_id, std::string taxonomy_version, std::vector<CanonicalState> states,
                 std::set<Transition> transitions, std::vector<Provenance> provenance)
    : usage_id_(std::move(usage_id)),
      taxonomy_version_(std::move(taxonomy_version)),
      states_(std::move(states)),
      transitions_(std::move(transitions)),
      provenance_(std::move(provenance)) {}

bool IrModel::has_state(std::string_view name) const {
  return std::any_of(states_.begin(), states_.end(), [&](const CanonicalState& s) { return s.name == name; });
}

const CanonicalState& IrModel::state(std::string_view name) const {
  for (const auto& s : states_)
    if (s.name == name) return s;
  throw Error(ErrorCode::UnknownState, "state '" + std::string(name) + "' not in model " + usage_id_);
}

std::vector<std::string> IrModel::start_states() const {
  std::vector<std::string> out;
  for (const auto& s : states_)
    if (s.is_start) out.push_back(s.name);
  return out;
}

std::vector<std::string> IrModel::end_states() const {
  std::vector<std::string> out;
  for (const auto& s : states_)
    if (s.is_end) out.push_back(s.name);
  return out;
}

bool IrModel::is_end(std::string_view name) const { return has_state(name) && state(name).is_end; }

std::vector<Transition> IrModel::successors(std::string_view name) const {
  state(name);
  std::vector<Transition> out;
  for (const auto& t : transitions_)
    if (t.from == name) out.push_back(t);
  std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) {
    return std::tie(a.widget, a.action, a.to) < std::tie(b.widget, b.action, b.to);
  });
  return out;
}

void IrModel::validate() const {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::ModelParseError, usage_id_ + ": " + why); };
  if (!is_safe_identifier(usage_id_)) fail("bad usage id '" + usage_id_ + "'");
  std::set<std::string> names;
  for (const auto& s : states_) {
    if (s.name.empty() || s.name.find_first_of(" \t\n") != std::string::npos) fail("bad state name '" + s.name + "'");
    if (!names.insert(s.name).second) fail("duplicate state " + s.name);
  }
  for (const auto& p : provenance_) {
    if ((p.app_id + p.recording_id).find_first_of("\t\n;:") != std::string::npos) fail("bad provenance entry");
  }
  auto starts = start_states();
  if (starts.empty()) fail("no start state");
  if (provenance_.size() <= 1 && starts.size() != 1) fail("single-trace model must have exactly one start state");
  for (const auto& t : transitions_) {
    if (!names.count(t.from) || !names.count(t.to)) fail("transition references unknown state: " + to_string(t));
    if (t.widget.has_value() == is_swipe(t.action)) fail("widget must be absent iff swipe: " + to_string(t));
    if (t.widget && (t.widget->empty() || t.widget->find_first_of(" \t\n") != std::string::npos))
      fail("bad widget name in " + to_string(t));
  }
  std::set<std::string> seen(starts.begin(), starts.end());
  std::vector<std::string> frontier(starts.begin(), starts.end());
  while (!frontier.empty()) {
    std::string cur = frontier.back();
    frontier.pop_back();
    for (const auto& t : transitions_)
      if (t.from == cur && seen.insert(t.to).second) frontier.push_back(t.to);
  }
  for (const auto& e : end_states())
    if (!seen.count(e)) fail("end state " + e + " unreachable from start");
}

std::string IrModel::to_text() const {
  std::ostringstream out;
  out << "IRMODEL 1\n";
  out << "usage " << usage_id_ << "\n";
  out << "taxonomy " << (taxonomy_version_.empty() ? "-" : taxonomy_version_) << "\n";
  out << "PROVENANCE " << provenance_.size() << "\n";
  for (const auto& p : provenance_) out << p.app_id << "\t" << p.recording_id << "\n";
  out << "STATES " << states_.size() << "\n";
  for (const auto& s : states_) out << s.name << " " << s.is_start << " " << s.is_end << "\n";
  out << "TRANSITIONS " << transitions_.size() << "\n";
  for (const auto& t : transitions_) out << to_string(t) << "\n";
  out << "END\n";
  return out.str();
}

IrModel IrModel::from_text(const std::string& text) {
  std::istringstream in(text);
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ModelParseError, "line " + std::to_string(lineno) + ": " + why);
  };
  auto next = [&]() {
    std::string line;
    if (!std::getline(in, line)) fail("unexpected end of file");
    ++lineno;
    return line;
  };
  auto keyed = [&](const std::string& key) {
    std::string line = next();
    if (line.rfind(key + " ", 0) != 0) fail("expected '" + key + "'");
    return line.substr(key.size() + 1);
  };
  auto count = [&](const std::string& key) {
    std::string v = keyed(key);
    try {
      std::size_t pos = 0;
      long n = std::stol(v, &pos);
      if (pos != v.size() || n < 0) throw std::invalid_argument(v);
      return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      fail("bad count '" + v + "'");
    }
    return std::size_t{0};
  };

  if (next() != "IRMODEL 1") fail("not an IRMODEL 1 file");
  std::string usage = keyed("usage");
  std::string taxonomy = keyed("taxonomy");
  if (taxonomy == "-") taxonomy.clear();

  std::vector<Provenance> prov;
  for (std::size_t i = 0, n = count("PROVENANCE"); i < n; ++i) {
    std::string line = next();
    auto tab = line.find('\t');
    if (tab == std::string::npos) fail("provenance needs app<TAB>recording");
    prov.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  std::vector<CanonicalState> states;
  for (std::size_t i = 0, n = count("STATES"); i < n; ++i) {
    std::istringstream rec(next());
    CanonicalState s;
    int a = -1, b = -1;
    std::string extra;
    if (!(rec >> s.name >> a >> b) || (rec >> extra) || a < 0 || a > 1 || b < 0 || b > 1) fail("bad state record");
    s.is_start = a == 1;
    s.is_end = b == 1;
    states.push_back(std::move(s));
  }
  std::set<Transition> transitions;
  for (std::size_t i = 0, n = count("TRANSITIONS"); i < n; ++i) {
    std::istringstream rec(next());
    std::string from, widget, action, to, extra;
    if (!(rec >> from >> widget >> action >> to) || (rec >> extra)) fail("bad transition record");
    Transition t;
    t.from = from;
    t.to = to;
    if (widget != "-") t.widget = widget;
    try {
      t.action = parse_action_kind(action);
    } catch (const Error&) {
      fail("unknown action '" + action + "'");
    }
    transitions.insert(std::move(t));
  }
  if (next() != "END") fail("missing END");
  IrModel m(usage, taxonomy, std::move(states), std::move(transitions), std::move(prov));
  m.validate();
  return m;
}

std::string trace_to_json(const LabeledTrace& trace) {
  nlohmann::json doc = {{"usage_id", trace.usage_id},
                        {"final_screen", trace.final_screen},
                        {"source", {{"app_id", trace.source.app_id}, {"recording_id", trace.source.recording_id}}},
                        {"steps", nlohmann::json::array()}};
  for (const auto& s : trace.steps)
    doc["steps"].push_back({{"screen", s.screen},
                            {"widget", s.widget ? nlohmann::json(*s.widget) : nlohmann::json(nullptr)},
                            {"action", to_string(s.action)}});
  return doc.dump(1) + "\n";
}

LabeledTrace trace_from_json(const std::string& json_text) {
  LabeledTrace t;
  try {
    auto doc = nlohmann::json::parse(json_text);
    t.usage_id = doc.at("usage_id").get<std::string>();
    t.final_screen = doc.value("final_screen", "");
    if (doc.contains("source")) {
      t.source.app_id = doc["source"].value("app_id", "");
      t.source.recording_id = doc["source"].value("recording_id", "");
    }
    for (const auto& js : doc.at("steps")) {
      TraceStep s;
      s.screen = js.at("screen").get<std::string>();
      if (js.contains("widget") && !js["widget"].is_null()) s.widget = js["widget"].get<std::string>();
      s.action = parse_action_kind(js.value("action", "click"));
      t.steps.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("trace: ") + e.what());
  }
  return t;
}

IrModel build_model(const LabeledTrace& trace, const CanonicalTaxonomy& taxonomy) {
  if (trace.steps.empty()) throw Error(ErrorCode::InvalidInput, "empty trace for usage " + trace.usage_id);
  if (!is_safe_identifier(trace.usage_id)) throw Error(ErrorCode::InvalidInput, "bad usage id '" + trace.usage_id + "'");
  auto check_screen = [&](const std::string& s) {
    if (!taxonomy.has_screen(s)) throw Error(ErrorCode::UnknownCategory, "screen category '" + s + "'");
  };
  std::vector<CanonicalState> states;
  auto add_state = [&](const std::string& s) {
    check_screen(s);
    if (std::none_of(states.begin(), states.end(), [&](const CanonicalState& c) { return c.name == s; }))
      states.push_back({s, false, false});
  };
  std::set<Transition> transitions;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    add_state(step.screen);
    if (step.widget.has_value() == is_swipe(step.action)) {
      throw Error(ErrorCode::InvalidInput, "step " + std::to_string(i) + ": widget must be absent iff swipe");
    }
    if (step.widget && !taxonomy.has_widget(*step.widget))
      throw Error(ErrorCode::UnknownCategory, "widget category '" + *step.widget + "'");
    const std::string& to = i + 1 < trace.steps.size() ? trace.steps[i + 1].screen : trace.final_screen;
    add_state(to);
    transitions.insert({step.screen, step.widget, step.action, to});
  }
  for (auto& s : states) {
    s.is_start = s.name == trace.steps.front().screen;
    s.is_end = s.name == trace.final_screen;
  }
  IrModel m(trace.usage_id, taxonomy.version(), std::move(states), std::move(transitions), {trace.source});
  m.validate();
  return m;
}

IrModel merge_models(const std::vector<IrModel>& models) {
  if (models.empty()) throw Error(ErrorCode::InvalidInput, "nothing to merge");
  const IrModel& first = models.front();
  std::vector<CanonicalState> states;
  std::set<Transition> transitions;
  std::vector<Provenance> prov;
  for (const IrModel& m : models) {
    if (m.usage_id() != first.usage_id())
      throw Error(ErrorCode::UsageMismatch, "cannot merge " + first.usage_id() + " with " + m.usage_id());
    if (m.taxonomy_version() != first.taxonomy_version())
      throw Error(ErrorCode::UsageMismatch, "taxonomy versions differ: " + first.taxonomy_version() + " vs " +
                                                m.taxonomy_version());
    for (const auto& s : m.states()) {
      auto it = std::find_if(states.begin(), states.end(), [&](const CanonicalState& c) { return c.name == s.name; });
      if (it == states.end()) {
        states.push_back(s);
      } else {
        it->is_start = it->is_start || s.is_start;
        it->is_end = it->is_end || s.is_end;
      }
    }
    transitions.insert(m.transitions().begin(), m.transitions().end());
    prov.insert(prov.end(), m.provenance().begin(), m.provenance().end());
  }
  return IrModel(first.usage_id(), first.taxonomy_version(), std::move(states), std::move(transitions),
                 std::move(prov));
}

bool is_safe_identifier(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// ---------------------------------------------------------------------------
// database

namespace {

class FileLock {
 public:
  FileLock(const fs::path& path, bool exclusive) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open lock " + path.string());
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::IoError, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string encode_provenance(const std::vector<Provenance>& prov) {
  std::string out;
  for (const auto& p : prov) {
    if (!out.empty()) out += ";";
    out += p.app_id + ":" + p.recording_id;
  }
  return out;
}

std::vector<ModelInfo> read_index(const fs::path& root) {
  std::vector<ModelInfo> out;
  fs::path idx = root / "index.tsv";
  if (!fs::exists(idx)) return out;
  std::istringstream in(read_file(idx));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rec(line);
    ModelInfo info;
    std::string prov;
    std::getline(rec, info.model_id, '\t');
    std::getline(rec, info.usage_id, '\t');
    std::getline(rec, prov);
    std::istringstream ps(prov);
    std::string item;
    while (std::getline(ps, item, ';')) {
      auto colon = item.find(':');
      if (colon == std::string::npos) continue;
      info.provenance.push_back({item.substr(0, colon), item.substr(colon + 1)});
    }
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace

ModelDatabase::ModelDatabase(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "models", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + root_.string() + ": " + ec.message());
}

std::string ModelDatabase::store(const IrModel& model) {
  model.validate();
  FileLock lock(root_ / ".lock", true);
  auto index = read_index(root_);
  char id[32];
  std::snprintf(id, sizeof id, "m%06zu", index.size() + 1);
  write_file_atomic(root_ / "models" / model.usage_id() / (std::string(id) + ".ir"), model.to_text());
  std::string all;
  for (const auto& info : index) all += info.model_id + "\t" + info.usage_id + "\t" + encode_provenance(info.provenance) + "\n";
  all += std::string(id) + "\t" + model.usage_id() + "\t" + encode_provenance(model.provenance()) + "\n";
  write_file_atomic(root_ / "index.tsv", all);
  std::error_code ec;
  fs::remove(root_ / "merged" / (model.usage_id() + ".ir"), ec);
  return id;
}

IrModel ModelDatabase::load(const std::string& model_id) const {
  FileLock lock(root_ / ".lock", false);
  for (const auto& info : read_index(root_)) {
    if (info.model_id == model_id) return IrModel::from_text(read_file(root_ / "models" / info.usage_id / (model_id + ".ir")));
  }
  throw Error(ErrorCode::IoError, "no model " + model_id);
}

std::vector<ModelInfo> ModelDatabase::list(const std::optional<std::string>& usage_id) const {
  FileLock lock(root_ / ".lock", false);
  auto all = read_index(root_);
  if (usage_id) std::erase_if(all, [&](const ModelInfo& m) { return m.usage_id != *usage_id; });
  return all;
}

std::vector<std::string> ModelDatabase::usages() const {
  std::set<std::string> u;
  for (const auto& info : list()) u.insert(info.usage_id);
  return {u.begin(), u.end()};
}

IrModel ModelDatabase::merged(const std::string& usage_id) const {
  if (!is_safe_identifier(usage_id)) throw Error(ErrorCode::NoModelForUsage, "bad usage id '" + usage_id + "'");
  FileLock lock(root_ / ".lock", true);
  fs::path cache = root_ / "merged" / (usage_id + ".ir");
  if (fs::exists(cache)) return IrModel::from_text(read_file(cache));
  std::vector<IrModel> models;
  for (const auto& info : read_index(root_)) {
    if (info.usage_id != usage_id) continue;
    models.push_back(IrModel::from_text(read_file(root_ / "models" / usage_id / (info.model_id + ".ir"))));
  }
  if (models.empty()) throw Error(ErrorCode::NoModelForUsage, "no stored model for usage '" + usage_id + "'");
  IrModel m = merge_models(models);
  write_file_atomic(cache, m.to_text());
  return m;
}

}  // namespace ugen
