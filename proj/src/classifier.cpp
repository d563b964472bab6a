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

#include "ugen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ugen/error.hpp"
#include "ugen/process.hpp"

namespace ugen {

bool TopKPrediction::contains(std::string_view label) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == label; });
}

double TopKPrediction::confidence(std::string_view label) const {
  for (const auto& [name, conf] : entries) {
    if (name == label) return conf;
  }
  return 0.0;
}

std::string to_string(ModelKind kind) { return kind == ModelKind::KNN ? "knn" : "linear"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "knn" || text == "KNN") return ModelKind::KNN;
  if (text == "linear" || text == "Linear") return ModelKind::Linear;
  throw Error(ErrorCode::InvalidInput, "unknown model kind '" + std::string(text) + "'");
}

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::max(0.0, 1.0 - a.dot(b) / (na * nb));
}

namespace {

Eigen::VectorXd as_vector(const FeatureVector& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

// Ranked entries over the full class set: confidence desc, then name asc.
TopKPrediction rank(const std::vector<std::string>& classes, const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> order(classes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return classes[a] < classes[b];
  });
  TopKPrediction out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) out.entries.emplace_back(classes[order[i]], scores[order[i]]);
  return out;
}

}  // namespace

std::vector<double> ClassifierModel::scores(const FeatureVector& features) const {
  if (features.schema_id != schema_id_ || features.values.size() != dims_) {
    throw Error(ErrorCode::SchemaMismatch, "model expects " + schema_id_ + "/" + std::to_string(dims_) + ", got " +
                                               features.schema_id + "/" + std::to_string(features.values.size()));
  }
  Eigen::VectorXd x = as_vector(features);
  std::vector<double> out(classes_.size(), 0.0);
  if (kind_ == ModelKind::KNN) {
    std::vector<std::pair<double, Eigen::Index>> dist;
    dist.reserve(static_cast<std::size_t>(exemplars_.rows()));
    for (Eigen::Index i = 0; i < exemplars_.rows(); ++i) {
      dist.emplace_back(cosine_distance(exemplars_.row(i).transpose(), x), i);
    }
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    const bool exact = dist.front().first <= 1e-12;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double w;
      if (exact) w = dist[i].first <= 1e-12 ? 1.0 : 0.0;
      else w = 1.0 / dist[i].first;
      out[static_cast<std::size_t>(exemplar_labels_[static_cast<std::size_t>(dist[i].second)])] += w;
      total += w;
    }
    for (double& v : out) v /= total;
  } else {
    Eigen::VectorXd h = (w1_ * x + b1_).cwiseMax(0.0);
    Eigen::VectorXd logits = w2_ * h + b2_;
    double mx = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - mx).exp();
    e /= e.sum();
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = e(static_cast<Eigen::Index>(c));
  }
  return out;
}

TopKPrediction ClassifierModel::predict_topk(const FeatureVector& features, std::size_t k) const {
  return rank(classes_, scores(features), k);
}

ClassifierModel train(const std::vector<LabeledExample>& examples, ModelKind kind, const Hyperparams& hyper,
                      const std::string& taxonomy_version) {
  if (examples.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training examples");
  const auto& schema = examples.front().features.schema_id;
  const std::size_t dims = examples.front().features.values.size();
  std::set<std::string> classes, apps;
  for (const auto& ex : examples) {
    if (ex.features.schema_id != schema || ex.features.values.size() != dims) {
      throw Error(ErrorCode::SchemaMismatch, "examples mix " + schema + " and " + ex.features.schema_id);
    }
    classes.insert(ex.label);
    apps.insert(ex.app_id);
  }
  ClassifierModel m;
  m.kind_ = kind;
  m.schema_id_ = schema;
  m.dims_ = dims;
  m.classes_.assign(classes.begin(), classes.end());
  m.training_apps_.assign(apps.begin(), apps.end());
  m.taxonomy_version_ = taxonomy_version;

  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto d = static_cast<Eigen::Index>(dims);
  const auto c = static_cast<Eigen::Index>(m.classes_.size());
  Eigen::MatrixXd x(n, d);
  std::vector<int> y(examples.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i)];
    x.row(i) = as_vector(ex.features).transpose();
    y[static_cast<std::size_t>(i)] = static_cast<int>(
        std::lower_bound(m.classes_.begin(), m.classes_.end(), ex.label) - m.classes_.begin());
  }

  if (kind == ModelKind::KNN) {
    m.k_ = std::max(1, hyper.knn_k);
    m.exemplars_ = std::move(x);
    m.exemplar_labels_ = std::move(y);
    return m;
  }

  const auto h = static_cast<Eigen::Index>(hyper.hidden_units);
  std::mt19937_64 rng(hyper.seed);
  auto init = [&](Eigen::MatrixXd& w, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / static_cast<double>(cols)),
                                                std::sqrt(6.0 / static_cast<double>(cols)));
    w.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
  };
  init(m.w1_, h, d);
  init(m.w2_, c, h);
  m.b1_ = Eigen::VectorXd::Zero(h);
  m.b2_ = Eigen::VectorXd::Zero(c);

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd vw1 = Eigen::MatrixXd::Zero(h, d), vw2 = Eigen::MatrixXd::Zero(c, h);
  Eigen::VectorXd vb1 = Eigen::VectorXd::Zero(h), vb2 = Eigen::VectorXd::Zero(c);
  double prev_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    Eigen::MatrixXd z1 = (x * m.w1_.transpose()).rowwise() + m.b1_.transpose();
    Eigen::MatrixXd act = z1.cwiseMax(0.0);
    Eigen::MatrixXd logits = (act * m.w2_.transpose()).rowwise() + m.b2_.transpose();
    Eigen::MatrixXd p = softmax_rows(logits);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss -= std::log(std::max(p(i, y[static_cast<std::size_t>(i)]), 1e-300));
    loss /= static_cast<double>(n);
    if (std::abs(prev_loss - loss) < hyper.loss_tolerance) break;
    prev_loss = loss;

    Eigen::MatrixXd dz2 = (p - onehot) / static_cast<double>(n);
    Eigen::MatrixXd gw2 = dz2.transpose() * act;
    Eigen::VectorXd gb2 = dz2.colwise().sum().transpose();
    Eigen::MatrixXd dz1 = (dz2 * m.w2_).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    Eigen::MatrixXd gw1 = dz1.transpose() * x;
    Eigen::VectorXd gb1 = dz1.colwise().sum().transpose();

    vw1 = hyper.momentum * vw1 - hyper.learning_rate * gw1;
    vw2 = hyper.momentum * vw2 - hyper.learning_rate * gw2;
    vb1 = hyper.momentum * vb1 - hyper.learning_rate * gb1;
    vb2 = hyper.momentum * vb2 - hyper.learning_rate * gb2;
    m.w1_ += vw1;
    m.w2_ += vw2;
    m.b1_ += vb1;
    m.b2_ += vb2;
  }
  return m;
}

bool operator==(const ClassifierModel& a, const ClassifierModel& b) { return a.to_text() == b.to_text(); }

namespace {

void write_row(std::ostringstream& out, const double* v, Eigen::Index n) {
  char buf[40];
  for (Eigen::Index j = 0; j < n; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", v[j]);
    if (j) out << ' ';
    out << buf;
  }
  out << '\n';
}

void write_matrix(std::ostringstream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::RowVectorXd row = m.row(i);
    write_row(out, row.data(), row.size());
  }
}

class TextReader {
 public:
  explicit TextReader(const std::string& text) : in_(text) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) fail("unexpected end of file");
    ++lineno_;
    return l;
  }

  std::vector<std::string> fields(std::size_t expected, const std::string& key) {
    std::istringstream ss(line());
    std::vector<std::string> out;
    std::string f;
    while (ss >> f) out.push_back(f);
    if (out.size() != expected || (!key.empty() && out[0] != key)) fail("expected '" + key + "'");
    return out;
  }

  std::vector<double> numbers(std::size_t expected) {
    std::istringstream ss(line());
    std::vector<double> out;
    out.reserve(expected);
    std::string tok;
    while (ss >> tok) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        fail("bad number '" + tok + "'");
      }
    }
    if (out.size() != expected) fail("expected " + std::to_string(expected) + " numbers");
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& name) {
    auto f = fields(3, name);
    auto rows = to_index(f[1]), cols = to_index(f[2]);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto v = numbers(static_cast<std::size_t>(cols));
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(j)];
    }
    return m;
  }

  Eigen::Index to_index(const std::string& s) {
    try {
      long v = std::stol(s);
      if (v < 0) fail("negative size");
      return static_cast<Eigen::Index>(v);
    } catch (const std::exception&) {
      fail("bad integer '" + s + "'");
    }
    return 0;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ModelParseError, "line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::istringstream in_;
  int lineno_ = 0;
};

}  // namespace

std::string ClassifierModel::to_text() const {
  std::ostringstream out;
  out << "UGEN-CLASSIFIER 1\n";
  out << "kind " << to_string(kind_) << '\n';
  out << "schema " << schema_id_ << '\n';
  out << "dims " << dims_ << '\n';
  out << "taxonomy " << (taxonomy_version_.empty() ? "-" : taxonomy_version_) << '\n';
  out << "classes " << classes_.size() << '\n';
  for (const auto& c : classes_) out << c << '\n';
  out << "apps " << training_apps_.size() << '\n';
  for (const auto& a : training_apps_) out << a << '\n';
  if (kind_ == ModelKind::KNN) {
    out << "k " << k_ << '\n' << "metric cosine\n";
    out << "exemplars " << exemplars_.rows() << '\n';
    for (Eigen::Index i = 0; i < exemplars_.rows(); ++i) {
      out << exemplar_labels_[static_cast<std::size_t>(i)] << ' ';
      Eigen::RowVectorXd row = exemplars_.row(i);
      write_row(out, row.data(), row.size());
    }
  } else {
    write_matrix(out, "w1", w1_);
    write_matrix(out, "b1", b1_.transpose());
    write_matrix(out, "w2", w2_);
    write_matrix(out, "b2", b2_.transpose());
  }
  out << "end\n";
  return out.str();
}

ClassifierModel ClassifierModel::from_text(const std::string& text) {
  TextReader r(text);
  if (r.line() != "UGEN-CLASSIFIER 1") r.fail("missing header");
  ClassifierModel m;
  m.kind_ = parse_model_kind(r.fields(2, "kind")[1]);
  m.schema_id_ = r.fields(2, "schema")[1];
  m.dims_ = static_cast<std::size_t>(r.to_index(r.fields(2, "dims")[1]));
  m.taxonomy_version_ = r.fields(2, "taxonomy")[1];
  if (m.taxonomy_version_ == "-") m.taxonomy_version_.clear();
  auto nclasses = r.to_index(r.fields(2, "classes")[1]);
  for (Eigen::Index i = 0; i < nclasses; ++i) m.classes_.push_back(r.line());
  auto napps = r.to_index(r.fields(2, "apps")[1]);
  for (Eigen::Index i = 0; i < napps; ++i) m.training_apps_.push_back(r.line());
  const auto d = static_cast<Eigen::Index>(m.dims_);
  if (m.kind_ == ModelKind::KNN) {
    m.k_ = static_cast<int>(r.to_index(r.fields(2, "k")[1]));
    r.fields(2, "metric");
    auto n = r.to_index(r.fields(2, "exemplars")[1]);
    m.exemplars_.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto v = r.numbers(m.dims_ + 1);
      int label = static_cast<int>(v[0]);
      if (label < 0 || label >= static_cast<int>(m.classes_.size())) r.fail("label index out of range");
      m.exemplar_labels_.push_back(label);
      for (Eigen::Index j = 0; j < d; ++j) m.exemplars_(i, j) = v[static_cast<std::size_t>(j + 1)];
    }
    if (n == 0) r.fail("no exemplars");
  } else {
    m.w1_ = r.matrix("w1");
    m.b1_ = r.matrix("b1").transpose();
    m.w2_ = r.matrix("w2");
    m.b2_ = r.matrix("b2").transpose();
    const auto c = static_cast<Eigen::Index>(m.classes_.size());
    if (m.w1_.cols() != d || m.b1_.size() != m.w1_.rows() || m.w2_.cols() != m.w1_.rows() || m.w2_.rows() != c ||
        m.b2_.size() != c) {
      r.fail("parameter shapes inconsistent with schema and class count");
    }
  }
  if (r.line() != "end") r.fail("missing end marker");
  return m;
}

void ClassifierModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_text();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

ClassifierModel ClassifierModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::vector<AccuracyRow> evaluate_leave_one_app_out(const std::vector<LabeledExample>& dataset, ModelKind kind,
                                                    const std::vector<int>& k_values, const Hyperparams& hyper) {
  std::set<std::string> apps;
  for (const auto& ex : dataset) apps.insert(ex.app_id);
  if (apps.size() < 2) throw Error(ErrorCode::InsufficientApps, std::to_string(apps.size()) + " distinct app(s)");
  std::vector<AccuracyRow> rows;
  std::map<int, std::vector<double>> per_k;
  const int max_k = k_values.empty() ? 1 : *std::max_element(k_values.begin(), k_values.end());
  for (const auto& app : apps) {
    std::vector<LabeledExample> train_set, test_set;
    for (const auto& ex : dataset) (ex.app_id == app ? test_set : train_set).push_back(ex);
    ClassifierModel model = train(train_set, kind, hyper);
    std::map<int, int> hits;
    for (const auto& ex : test_set) {
      TopKPrediction pred = model.predict_topk(ex.features, static_cast<std::size_t>(max_k));
      for (int k : k_values) {
        for (int i = 0; i < k && i < static_cast<int>(pred.entries.size()); ++i) {
          if (pred.entries[static_cast<std::size_t>(i)].first == ex.label) {
            ++hits[k];
            break;
          }
        }
      }
    }
    for (int k : k_values) {
      double acc = static_cast<double>(hits[k]) / static_cast<double>(test_set.size());
      rows.push_back({app, k, acc, static_cast<int>(test_set.size())});
      per_k[k].push_back(acc);
    }
  }
  for (int k : k_values) {
    const auto& v = per_k[k];
    rows.push_back({"macro", k, std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()),
                    static_cast<int>(dataset.size())});
  }
  return rows;
}

std::string accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream out;
  out << "app_id,k,accuracy\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy);
    out << r.app_id << ',' << r.k << ',' << buf << '\n';
  }
  return out.str();
}

struct ExternalCategorizer::Impl {
  explicit Impl(const std::string& cmd) : child(cmd) {}
  ChildProcess child;
  std::mutex mu;
};

ExternalCategorizer::ExternalCategorizer(std::string command) : impl_(std::make_unique<Impl>(command)) {}
ExternalCategorizer::~ExternalCategorizer() = default;

TopKPrediction ExternalCategorizer::predict_topk(const FeatureVector& features, std::size_t k) const {
  nlohmann::json req = {{"schema", features.schema_id}, {"features", features.values}, {"k", k}};
  std::lock_guard lock(impl_->mu);
  impl_->child.write_line(req.dump());
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(impl_->child.read_line());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AdapterError, std::string("categorizer reply: ") + e.what());
  }
  std::vector<std::string> names;
  std::vector<double> scores;
  try {
    for (const auto& e : reply.at("entries")) {
      names.push_back(e.at(0).get<std::string>());
      scores.push_back(e.at(1).get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::AdapterError, std::string("categorizer reply: ") + e.what());
  }
  return rank(names, scores, k);
}

std::string dataset_to_text(const std::vector<LabeledExample>& examples) {
  std::ostringstream out;
  std::string schema = examples.empty() ? "-" : examples.front().features.schema_id;
  std::size_t dims = examples.empty() ? 0 : examples.front().features.values.size();
  out << "UGEN-DATASET 1 " << schema << ' ' << dims << '\n';
  for (const auto& ex : examples) {
    out << ex.app_id << '\t' << ex.recording_id << '\t' << ex.frame_index << '\t' << ex.label << '\t';
    write_row(out, ex.features.values.data(), static_cast<Eigen::Index>(ex.features.values.size()));
  }
  return out.str();
}

std::vector<LabeledExample> dataset_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version, schema;
  std::size_t dims = 0;
  if (!(hs >> magic >> version >> schema >> dims) || magic != "UGEN-DATASET" || version != "1") {
    throw Error(ErrorCode::InvalidInput, "dataset: bad header '" + header + "'");
  }
  std::vector<LabeledExample> out;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (int i = 0; i < 4; ++i) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) throw Error(ErrorCode::InvalidInput, "dataset line " + std::to_string(lineno) + ": missing field");
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    LabeledExample ex;
    ex.app_id = cols[0];
    ex.recording_id = cols[1];
    ex.frame_index = std::atoi(cols[2].c_str());
    ex.label = cols[3];
    ex.features.schema_id = schema;
    std::istringstream vs(line.substr(start));
    double v;
    while (vs >> v) ex.features.values.push_back(v);
    if (ex.features.values.size() != dims) {
      throw Error(ErrorCode::InvalidInput, "dataset line " + std::to_string(lineno) + ": expected " + std::to_string(dims) + " values");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void save_dataset(const std::vector<LabeledExample>& examples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << dataset_to_text(examples);
}

std::vector<LabeledExample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return dataset_from_text(ss.str());
}

}  // namespace ugen
