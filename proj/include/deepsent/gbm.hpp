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

#ifndef DEEPSENT_GBM_HPP_
#define DEEPSENT_GBM_HPP_

// Second-order multiclass gradient boosting with exact greedy trees.
//
// Each round computes softmax gradients g = p - y and Hessians h = p(1 - p)
// for every (row, class), grows one regression tree per class on those
// statistics, and adds learning_rate * leaf value to the class margin.
// Leaves minimise G*w + 0.5*(H + lambda)*w^2 + alpha*|w|, which gives
//   w = -soft_threshold(G, alpha) / (H + lambda)
// and the split gain
//   0.5 * [score(L) + score(R) - score(L+R)] - gamma,
//   score(G, H) = soft_threshold(G, alpha)^2 / (H + lambda).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "deepsent/tensor.hpp"

namespace deepsent::gbm {

struct GBMConfig {
  double learning_rate = 0.08;
  double lambda_l2 = 1.0;
  double alpha_l1 = 0.0;
  double gamma_min_gain = 0.0;
  int max_depth = 6;
  int n_rounds = 200;
  double min_child_weight = 1.0;
  int num_classes = 3;
  std::uint64_t seed = 0;

  // Hard bounds; throws InvalidArgument.
  void validate() const;
  // The range learning rates were tuned over; values outside it are allowed
  // but worth a warning.
  bool learning_rate_in_tuning_range() const {
    return learning_rate >= 0.05 && learning_rate <= 0.3;
  }

  friend bool operator==(const GBMConfig&, const GBMConfig&) = default;
};

// Flat node array; node 0 is the root. Rows with value < threshold go left.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  float threshold = 0.0f;
  int left = -1;
  int right = -1;
  float weight = 0.0f;  // leaf value, unscaled by the learning rate

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  float predict(const float* row) const;
  int depth() const;
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct GradHess {
  Eigen::MatrixXd g;  // N x K
  Eigen::MatrixXd h;  // N x K, >= 0
};

// Per-row softmax gradient and diagonal Hessian of the multiclass log loss.
GradHess softmax_grad_hess(const Eigen::MatrixXd& margins,
                           std::span<const int> labels);

// Mean multiclass log loss of softmax(margins).
double log_loss(const Eigen::MatrixXd& margins, std::span<const int> labels);

double soft_threshold(double g, double alpha);
double leaf_weight(double G, double H, const GBMConfig& config);
double split_gain(double GL, double HL, double GR, double HR,
                  const GBMConfig& config);

// Candidate threshold between consecutive distinct values lo < hi. The float
// midpoint is bumped to hi if rounding lands on lo, so lo always goes left.
float midpoint_threshold(float lo, float hi);

// Exact greedy growth on one class's statistics, level by level. Ties in
// gain resolve to the lowest feature index, then the lowest threshold.
Tree grow_tree(const RowMatrixXf& features, std::span<const double> g,
               std::span<const double> h, const GBMConfig& config);

struct GBMModel {
  GBMConfig config;
  int feature_count = 0;
  std::vector<double> base_margin;  // per class
  // Round-major then class: trees[r * num_classes + k].
  std::vector<Tree> trees;

  int rounds_completed() const {
    return config.num_classes ? static_cast<int>(trees.size()) /
                                    config.num_classes
                              : 0;
  }
  friend bool operator==(const GBMModel&, const GBMModel&) = default;
};

struct TrainingLog {
  // loss[0] is the loss of the base margins; loss[r] follows round r.
  std::vector<double> loss;
};

GBMModel fit(const RowMatrixXf& features, std::span<const int> labels,
             const GBMConfig& config, TrainingLog* log = nullptr);

Eigen::MatrixXd predict_margin(const GBMModel& model,
                               const RowMatrixXf& features);
Eigen::MatrixXd predict_proba(const GBMModel& model,
                              const RowMatrixXf& features);
// Argmax of the margins; the lowest class index wins ties.
std::vector<int> predict_class(const GBMModel& model,
                               const RowMatrixXf& features);

inline constexpr std::uint32_t kModelFormatVersion = 1;

// DFGB model file. The base margin is not part of the format and must be
// zero to save; loaded models get zero margins.
std::vector<std::uint8_t> save_model(const GBMModel& model);
GBMModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace deepsent::gbm

#endif  // DEEPSENT_GBM_HPP_
