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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ugen {

/// Fixed-length feature vector. `schema_id` binds the length and meaning of
/// every coordinate.
struct FeatureVector {
  std::string schema_id;
  std::vector<double> values;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Ranked classifier output: confidences non-increasing, categories distinct.
struct TopKPrediction {
  std::vector<std::pair<std::string, double>> entries;

  bool empty() const { return entries.empty(); }
  const std::string& top() const { return entries.front().first; }
  bool contains(std::string_view label) const;
  /// Confidence of `label`, 0 when absent.
  double confidence(std::string_view label) const;

  friend bool operator==(const TopKPrediction&, const TopKPrediction&) = default;
};

struct LabeledExample {
  FeatureVector features;
  std::string label;
  std::string app_id;
  std::string recording_id;
  int frame_index = -1;
};

/// Anything that ranks categories for a feature vector.
class Categorizer {
 public:
  virtual ~Categorizer() = default;
  virtual TopKPrediction predict_topk(const FeatureVector& features, std::size_t k) const = 0;
};

enum class ModelKind { KNN, Linear };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct Hyperparams {
  int knn_k = 5;
  int hidden_units = 128;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int max_epochs = 5000;
  double loss_tolerance = 1e-6;
  std::uint64_t seed = 42;
};

/// Trained KNN or one-hidden-layer softmax model. Immutable after training.
class ClassifierModel final : public Categorizer {
 public:
  ModelKind kind() const { return kind_; }
  const std::string& schema_id() const { return schema_id_; }
  std::size_t dims() const { return dims_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::string& taxonomy_version() const { return taxonomy_version_; }
  const std::vector<std::string>& training_apps() const { return training_apps_; }

  /// Throws Error(SchemaMismatch) when the vector's schema or length differ.
  TopKPrediction predict_topk(const FeatureVector& features, std::size_t k) const override;

  /// Confidence for every class, in classes() order.
  std::vector<double> scores(const FeatureVector& features) const;

  std::string to_text() const;
  static ClassifierModel from_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ClassifierModel load(const std::filesystem::path& path);

  friend ClassifierModel train(const std::vector<LabeledExample>& examples, ModelKind kind, const Hyperparams& hyper,
                               const std::string& taxonomy_version);
  friend bool operator==(const ClassifierModel&, const ClassifierModel&);

  // Linear parameters, exposed for determinism checks.
  const Eigen::MatrixXd& hidden_weights() const { return w1_; }
  const Eigen::MatrixXd& output_weights() const { return w2_; }

 private:
  ModelKind kind_ = ModelKind::KNN;
  std::string schema_id_;
  std::size_t dims_ = 0;
  std::vector<std::string> classes_;
  std::string taxonomy_version_;
  std::vector<std::string> training_apps_;

  // KNN
  int k_ = 5;
  Eigen::MatrixXd exemplars_;  // one row per exemplar
  std::vector<int> exemplar_labels_;

  // Linear: hidden = relu(w1 * x + b1), logits = w2 * hidden + b2
  Eigen::MatrixXd w1_, w2_;
  Eigen::VectorXd b1_, b2_;
};

/// Throws Error(EmptyTrainingSet) on no examples and Error(SchemaMismatch) on
/// mixed schemas or lengths.
ClassifierModel train(const std::vector<LabeledExample>& examples, ModelKind kind, const Hyperparams& hyper = {},
                      const std::string& taxonomy_version = "");

/// Cosine distance; 0 when both vectors are zero and 1 when only one is.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

struct AccuracyRow {
  std::string app_id;  ///< "macro" for the macro-average row
  int k = 1;
  double accuracy = 0.0;
  int tested = 0;
};

/// For every app: train on the other apps, test on it. Rows per (app, k) and a
/// macro-average per k. Throws Error(InsufficientApps) below two apps.
std::vector<AccuracyRow> evaluate_leave_one_app_out(const std::vector<LabeledExample>& dataset, ModelKind kind,
                                                    const std::vector<int>& k_values, const Hyperparams& hyper = {});

/// CSV with columns app_id,k,accuracy.
std::string accuracy_csv(const std::vector<AccuracyRow>& rows);

/// Categorizer backed by an external process speaking newline-delimited JSON:
/// request {"schema":..,"features":[..],"k":k}, reply {"entries":[[label,conf],..]}.
class ExternalCategorizer final : public Categorizer {
 public:
  explicit ExternalCategorizer(std::string command);
  ~ExternalCategorizer() override;
  TopKPrediction predict_topk(const FeatureVector& features, std::size_t k) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Dataset text format: header `UGEN-DATASET 1 <schema> <dims>`, then one
/// tab-separated record per line: app, recording, frame, label, values.
std::string dataset_to_text(const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> dataset_from_text(const std::string& text);
void save_dataset(const std::vector<LabeledExample>& examples, const std::filesystem::path& path);
std::vector<LabeledExample> load_dataset(const std::filesystem::path& path);

}  // namespace ugen
