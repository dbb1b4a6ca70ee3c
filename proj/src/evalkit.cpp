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

#include "deepsent/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "deepsent/errors.hpp"

namespace deepsent::eval {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform draw in [0, bound) by rejection; unlike
// std::uniform_int_distribution its output is the same on every platform.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

void check_binary_task(std::span<const double> scores,
                       std::span<const int> labels, int positive_class,
                       std::int64_t& positives, std::int64_t& negatives) {
  if (scores.size() != labels.size()) {
    throw ShapeError("auc: " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(labels.size()) + " labels");
  }
  positives = std::count(labels.begin(), labels.end(), positive_class);
  negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw DataError("class " + std::to_string(positive_class) +
                    " is degenerate for one-vs-rest ROC: " +
                    std::to_string(positives) + " positives, " +
                    std::to_string(negatives) + " negatives");
  }
}

// Indices sorted by descending score.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return idx;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / n);
  return s;
}

RowMatrixXf take_rows(const RowMatrixXf& x, const std::vector<int>& rows) {
  RowMatrixXf out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (counts.rows() != other.counts.rows()) {
    throw ShapeError("cannot add confusion matrices of different class counts");
  }
  counts += other.counts;
  return *this;
}

ConfusionMatrix confusion(std::span<const int> y_true,
                          std::span<const int> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("confusion: " + std::to_string(y_true.size()) +
                     " true labels vs " + std::to_string(y_pred.size()) +
                     " predictions");
  }
  if (num_classes < 1) throw InvalidArgument("confusion: num_classes < 1");
  ConfusionMatrix cm;
  cm.counts.setZero(num_classes, num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw InvalidArgument("confusion: label out of range at index " +
                            std::to_string(i));
    }
    ++cm.counts(t, p);
  }
  return cm;
}

std::vector<ClassScores> precision_recall_f1(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  std::vector<ClassScores> out(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto tp = static_cast<double>(cm.counts(c, c));
    const auto predicted = static_cast<double>(cm.counts.col(c).sum());
    const auto actual = static_cast<double>(cm.counts.row(c).sum());
    ClassScores& s = out[c];
    s.precision_defined = predicted > 0;
    s.recall_defined = actual > 0;
    s.precision = s.precision_defined ? tp / predicted : 0.0;
    s.recall = s.recall_defined ? tp / actual : 0.0;
    s.f1_defined = s.precision + s.recall > 0;
    s.f1 = s.f1_defined
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
  }
  return out;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) throw InvalidArgument("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.counts.trace()) / static_cast<double>(total);
}

double RocCurve::area() const {
  double a = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i) {
    a += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
  }
  return a;
}

double auc_ovr(std::span<const double> scores, std::span<const int> labels,
               int positive_class) {
  std::int64_t positives = 0, negatives = 0;
  check_binary_task(scores, labels, positive_class, positives, negatives);
  // Walk tie groups from the lowest score up, counting negatives below.
  std::vector<std::size_t> idx = descending(scores);
  std::reverse(idx.begin(), idx.end());
  std::int64_t concordant = 0, tied = 0, negatives_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::int64_t pos = 0, neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == positive_class ? pos : neg) += 1;
      ++j;
    }
    concordant += pos * negatives_below;
    tied += pos * neg;
    negatives_below += neg;
    i = j;
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

RocCurve roc_curve_ovr(std::span<const double> scores,
                       std::span<const int> labels, int positive_class) {
  std::int64_t positives = 0, negatives = 0;
  check_binary_task(scores, labels, positive_class, positives, negatives);
  const std::vector<std::size_t> idx = descending(scores);
  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double s = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == s) {
      (labels[idx[i]] == positive_class ? tp : fp) += 1;
      ++i;
    }
    curve.thresholds.push_back(s);
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  return curve;
}

std::vector<int> FoldAssignment::test_indices(int f) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> FoldAssignment::train_indices(int f) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(static_cast<int>(i));
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const int> labels, int k,
                                std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified_kfold: k must be >= 2");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw InvalidArgument("stratified_kfold: k=" + std::to_string(k) +
                          " exceeds sample count " +
                          std::to_string(labels.size()));
  }
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("stratified_kfold: negative label");
    max_label = std::max(max_label, l);
  }
  FoldAssignment out;
  out.k = k;
  out.fold.assign(labels.size(), -1);
  std::size_t offset = 0;
  for (int c = 0; c <= max_label; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(c))));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[bounded(rng, i)]);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.fold[members[j]] = static_cast<int>((offset + j) % k);
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }
  return out;
}

MetricsReport evaluate(std::span<const int> labels,
                       const Eigen::MatrixXd& proba, std::string dataset) {
  if (static_cast<Index>(labels.size()) != proba.rows()) {
    throw ShapeError("evaluate: probability rows do not match labels");
  }
  const int k = static_cast<int>(proba.cols());
  std::vector<int> predicted(labels.size());
  for (Index i = 0; i < proba.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (proba(i, c) > proba(i, best)) best = c;
    }
    predicted[i] = best;
  }
  MetricsReport report;
  report.dataset = std::move(dataset);
  report.confusion = confusion(labels, predicted, k);
  report.accuracy = labels.empty() ? 0.0 : accuracy(report.confusion);
  const auto scores = precision_recall_f1(report.confusion);
  report.classes.resize(static_cast<std::size_t>(k));
  report.curves.resize(static_cast<std::size_t>(k));
  std::vector<double> column(labels.size());
  for (int c = 0; c < k; ++c) {
    ClassMetrics& m = report.classes[c];
    m.precision = scores[c].precision;
    m.recall = scores[c].recall;
    m.f1 = scores[c].f1;
    m.precision_defined = scores[c].precision_defined;
    m.recall_defined = scores[c].recall_defined;
    m.f1_defined = scores[c].f1_defined;
    for (std::size_t i = 0; i < labels.size(); ++i) column[i] = proba(i, c);
    try {
      m.auc = auc_ovr(column, labels, c);
      report.curves[c] = roc_curve_ovr(column, labels, c);
    } catch (const DataError&) {
      m.auc = 0.0;
      m.auc_defined = false;
    }
  }
  return report;
}

CrossValidationResult cross_validate(const RowMatrixXf& features,
                                     std::span<const int> labels,
                                     const gbm::GBMConfig& config, int k,
                                     std::uint64_t seed, std::string dataset) {
  config.validate();
  const Index n = features.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw ShapeError("cross_validate: labels do not match feature rows");
  }
  const int classes = config.num_classes;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= classes) {
      throw InvalidArgument("cross_validate: label " + std::to_string(l) +
                            " out of range");
    }
    ++counts[l];
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[c] == 0) {
      throw DataError("cross_validate: class " + std::to_string(c) +
                      " has no samples");
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    for (Index j = 0; j < features.cols(); ++j) {
      if (features(a, j) != features(b, j)) return features(a, j) < features(b, j);
    }
    return false;
  });
  std::vector<int> canonical_labels(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) canonical_labels[j] = labels[order[j]];
  const FoldAssignment canonical = stratified_kfold(canonical_labels, k, seed);

  CrossValidationResult result;
  result.assignment.k = k;
  result.assignment.fold.assign(order.size(), -1);
  for (std::size_t j = 0; j < order.size(); ++j) {
    result.assignment.fold[order[j]] = canonical.fold[j];
  }
  result.oof_proba.setZero(n, classes);

  for (int f = 0; f < k; ++f) {
    const auto train = result.assignment.train_indices(f);
    const auto test = result.assignment.test_indices(f);
    std::vector<int> train_labels, test_labels;
    for (int i : train) train_labels.push_back(labels[i]);
    for (int i : test) test_labels.push_back(labels[i]);
    const gbm::GBMModel model =
        gbm::fit(take_rows(features, train), train_labels, config);
    const Eigen::MatrixXd proba =
        gbm::predict_proba(model, take_rows(features, test));
    for (std::size_t i = 0; i < test.size(); ++i) {
      result.oof_proba.row(test[i]) = proba.row(static_cast<Index>(i));
    }
    result.folds.push_back(evaluate(test_labels, proba, dataset));
    result.fold_accuracies.push_back(result.folds.back().accuracy);
  }

  result.accuracy = summarize(result.fold_accuracies);
  result.classes.resize(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    std::vector<double> p, r, f1, auc;
    for (const auto& fold : result.folds) {
      const ClassMetrics& m = fold.classes[c];
      // Folds where the class is present count; an undefined precision or
      // F1 there contributes its reported 0.
      if (m.recall_defined) {
        p.push_back(m.precision);
        r.push_back(m.recall);
        f1.push_back(m.f1);
      }
      if (m.auc_defined) auc.push_back(m.auc);
    }
    result.classes[c] = {summarize(p), summarize(r), summarize(f1),
                         summarize(auc)};
  }
  result.pooled = evaluate(labels, result.oof_proba, std::move(dataset));
  return result;
}

}  // namespace deepsent::eval
