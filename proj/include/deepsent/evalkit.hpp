// Copyright 2026 The deepsent Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEEPSENT_EVALKIT_HPP_
#define DEEPSENT_EVALKIT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deepsent/gbm.hpp"
#include "deepsent/tensor.hpp"

namespace deepsent::eval {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  int num_classes() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(std::span<const int> y_true,
                          std::span<const int> y_pred, int num_classes);

// A 0/0 ratio is reported as 0 with its `defined` flag cleared.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

std::vector<ClassScores> precision_recall_f1(const ConfusionMatrix& cm);

// trace / total; throws InvalidArgument on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

// One-vs-rest ROC from a threshold sweep over the distinct scores, highest
// first. The first point is (0,0) at threshold +inf, the last is (1,1).
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;

  // Trapezoid area.
  double area() const;
};

// Mann-Whitney AUC for `positive_class` against all others:
// (concordant + 0.5 * tied) / (P * N). Throws DataError when the class has
// no positives or no negatives.
double auc_ovr(std::span<const double> scores, std::span<const int> labels,
               int positive_class);
RocCurve roc_curve_ovr(std::span<const double> scores,
                       std::span<const int> labels, int positive_class);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold;  // per sample, in [0, k)

  std::vector<int> test_indices(int f) const;
  std::vector<int> train_indices(int f) const;
};

// Shuffles each class with a seed derived from (seed, class) and deals it
// round-robin, continuing the deal across classes so fold sizes also stay
// within one of each other.
FoldAssignment stratified_kfold(std::span<const int> labels, int k,
                                std::uint64_t seed);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
  bool auc_defined = true;
};

struct MetricsReport {
  std::string dataset;
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<RocCurve> curves;  // empty entry when the class is degenerate
};

// Metrics of a probability matrix (N x K) against true labels; predictions
// are the per-row argmax with the lowest index winning ties.
MetricsReport evaluate(std::span<const int> labels,
                       const Eigen::MatrixXd& proba, std::string dataset = {});

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over folds
};

struct ClassSummary {
  MetricSummary precision, recall, f1, auc;
};

struct CrossValidationResult {
  FoldAssignment assignment;
  std::vector<MetricsReport> folds;
  std::vector<double> fold_accuracies;
  MetricSummary accuracy;
  std::vector<ClassSummary> classes;
  // Pooled out-of-fold evaluation: summed confusion matrix and ROC curves
  // over every held-out prediction.
  MetricsReport pooled;
  Eigen::MatrixXd oof_proba;
};

// Stratified k-fold cross-validation of the boosted classifier. Samples are
// put into a canonical order (label, then feature values) before folds are
// dealt, so results do not depend on the order rows were supplied in.
CrossValidationResult cross_validate(const RowMatrixXf& features,
                                     std::span<const int> labels,
                                     const gbm::GBMConfig& config, int k,
                                     std::uint64_t seed,
                                     std::string dataset = {});

}  // namespace deepsent::eval

#endif  // DEEPSENT_EVALKIT_HPP_
