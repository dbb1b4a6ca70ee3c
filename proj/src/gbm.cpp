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

#include "deepsent/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "deepsent/binary_io.hpp"
#include "deepsent/errors.hpp"

namespace deepsent::gbm {
namespace {

constexpr std::string_view kMagic = "DFGB";
constexpr int kMaxDepthLimit = 64;

// Gradient statistics are summed in 2^-50 fixed point so that node sums do
// not depend on the order rows are visited. This keeps fitted trees
// identical under row permutations.
using FixedSum = __int128;
constexpr int kFixedBits = 50;
constexpr double kFixedLimit = 4096.0;

std::int64_t to_fixed(double x) {
  if (!std::isfinite(x) || std::fabs(x) > kFixedLimit) {
    throw InvalidArgument("gradient statistic out of range: " +
                          std::to_string(x));
  }
  return std::llround(std::ldexp(x, kFixedBits));
}

double from_fixed(FixedSum x) {
  return std::ldexp(static_cast<double>(x), -kFixedBits);
}

// Row order per feature sorted by (value, row). Constant columns are
// flagged and never scanned.
struct ColumnIndex {
  std::vector<std::vector<std::int32_t>> order;
  std::vector<bool> constant;

  explicit ColumnIndex(const RowMatrixXf& x) {
    const Index n = x.rows(), f = x.cols();
    order.resize(static_cast<std::size_t>(f));
    constant.assign(static_cast<std::size_t>(f), true);
    for (Index j = 0; j < f; ++j) {
      for (Index i = 1; i < n; ++i) {
        if (x(i, j) != x(0, j)) {
          constant[j] = false;
          break;
        }
      }
      if (constant[j]) continue;
      auto& idx = order[j];
      idx.resize(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::int32_t a, std::int32_t b) {
        return x(a, j) < x(b, j);
      });
    }
  }
};

struct NodeSums {
  FixedSum g = 0;
  FixedSum h = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  float threshold = 0.0f;
  NodeSums left;
};

struct ScanState {
  NodeSums left;
  float last = 0.0f;
  bool seen = false;
};

void check_finite(const RowMatrixXf& x) {
  if (!x.allFinite()) {
    throw DataError("feature matrix contains NaN or infinite values");
  }
}

// Renumbers a tree into preorder (node, left subtree, right subtree).
Tree to_preorder(const Tree& tree) {
  Tree out;
  out.nodes.reserve(tree.nodes.size());
  struct Frame {
    int src;
    int parent;
    bool is_left;
  };
  std::vector<Frame> frames{{0, -1, false}};
  while (!frames.empty()) {
    const Frame fr = frames.back();
    frames.pop_back();
    const int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back(tree.nodes[fr.src]);
    if (fr.parent >= 0) {
      (fr.is_left ? out.nodes[fr.parent].left : out.nodes[fr.parent].right) =
          idx;
    }
    const TreeNode& src = tree.nodes[fr.src];
    if (!src.is_leaf()) {
      frames.push_back({src.right, idx, false});
      frames.push_back({src.left, idx, true});
    }
  }
  return out;
}

Tree grow_tree_impl(const RowMatrixXf& x, const ColumnIndex& columns,
                    std::span<const std::int64_t> gq,
                    std::span<const std::int64_t> hq, const GBMConfig& config) {
  const Index n = x.rows();
  if (n == 0) throw InvalidArgument("grow_tree: empty node sample set");

  Tree tree;
  std::vector<NodeSums> sums(1);
  for (Index i = 0; i < n; ++i) {
    sums[0].g += gq[i];
    sums[0].h += hq[i];
  }
  tree.nodes.emplace_back();
  std::vector<int> position(static_cast<std::size_t>(n), 0);
  std::vector<int> frontier{0};

  auto make_leaf = [&](int node) {
    tree.nodes[node].feature = -1;
    tree.nodes[node].weight = static_cast<float>(leaf_weight(
        from_fixed(sums[node].g), from_fixed(sums[node].h), config));
  };

  for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[frontier[s]] = int(s);
    std::vector<SplitCandidate> best(frontier.size());
    std::vector<ScanState> scan(frontier.size());

    for (Index f = 0; f < x.cols(); ++f) {
      if (columns.constant[f]) continue;
      std::fill(scan.begin(), scan.end(), ScanState{});
      for (std::int32_t r : columns.order[f]) {
        const int slot = slot_of[position[r]];
        if (slot < 0) continue;
        ScanState& st = scan[slot];
        const float v = x(r, f);
        if (st.seen && v != st.last) {
          const NodeSums& parent = sums[frontier[slot]];
          const double hl = from_fixed(st.left.h);
          const double hr = from_fixed(parent.h - st.left.h);
          if (hl >= config.min_child_weight && hr >= config.min_child_weight) {
            const double gain =
                split_gain(from_fixed(st.left.g), hl,
                           from_fixed(parent.g - st.left.g), hr, config);
            if (gain > best[slot].gain) {
              best[slot] = {gain, static_cast<int>(f),
                            midpoint_threshold(st.last, v), st.left};
            }
          }
        }
        st.left.g += gq[r];
        st.left.h += hq[r];
        st.last = v;
        st.seen = true;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const int node = frontier[s];
      if (best[s].feature < 0) {
        make_leaf(node);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      const NodeSums parent = sums[node];
      sums.push_back(best[s].left);
      sums.push_back({parent.g - best[s].left.g, parent.h - best[s].left.h});
      TreeNode& split = tree.nodes[node];
      split.feature = best[s].feature;
      split.threshold = best[s].threshold;
      split.left = left;
      split.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (Index i = 0; i < n; ++i) {
      const TreeNode& node = tree.nodes[position[i]];
      if (node.is_leaf()) continue;
      position[i] = x(i, node.feature) < node.threshold ? node.left : node.right;
    }
    frontier = std::move(next);
  }
  for (int node : frontier) make_leaf(node);
  return to_preorder(tree);
}

std::vector<std::int64_t> quantize(std::span<const double> values) {
  std::vector<std::int64_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = to_fixed(values[i]);
  return out;
}

void check_labels(std::span<const int> labels, int num_classes) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw InvalidArgument("label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0," +
                            std::to_string(num_classes) + ")");
    }
  }
}

void write_tree(ByteWriter& out, const Tree& tree, int node) {
  const TreeNode& n = tree.nodes[node];
  if (n.is_leaf()) {
    out.put_u8(0);
    out.put_f32(n.weight);
    return;
  }
  out.put_u8(1);
  out.put_u32(static_cast<std::uint32_t>(n.feature));
  out.put_f32(n.threshold);
  write_tree(out, tree, n.left);
  write_tree(out, tree, n.right);
}

int read_tree(ByteReader& in, Tree& tree, int depth, int feature_count,
              const std::string& ctx) {
  if (depth > kMaxDepthLimit) {
    throw FormatInvariantError(ctx + " exceeds maximum depth");
  }
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const std::uint8_t kind = in.u8(ctx + " node kind");
  if (kind == 0) {
    tree.nodes[idx].weight = in.f32(ctx + " leaf weight");
    return idx;
  }
  if (kind != 1) {
    throw FormatInvariantError(ctx + " has unknown node kind " +
                               std::to_string(kind));
  }
  const std::uint32_t feature = in.u32(ctx + " feature index");
  if (feature >= static_cast<std::uint32_t>(feature_count)) {
    throw FormatInvariantError(ctx + " splits on feature " +
                               std::to_string(feature) + " of " +
                               std::to_string(feature_count));
  }
  const float threshold = in.f32(ctx + " threshold");
  const int left = read_tree(in, tree, depth + 1, feature_count, ctx);
  const int right = read_tree(in, tree, depth + 1, feature_count, ctx);
  TreeNode& node = tree.nodes[idx];
  node.feature = static_cast<int>(feature);
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return idx;
}

}  // namespace

void GBMConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument(what); };
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    fail("learning_rate must lie in (0, 1]");
  }
  if (!(lambda_l2 >= 0.0)) fail("lambda_l2 must be >= 0");
  if (!(alpha_l1 >= 0.0)) fail("alpha_l1 must be >= 0");
  if (!(gamma_min_gain >= 0.0)) fail("gamma_min_gain must be >= 0");
  if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
  if (max_depth < 0 || max_depth > kMaxDepthLimit) {
    fail("max_depth must lie in [0, 64]");
  }
  if (n_rounds < 0) fail("n_rounds must be >= 0");
  if (num_classes < 2) fail("num_classes must be >= 2");
}

float Tree::predict(const float* row) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = row[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[node].weight;
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

GradHess softmax_grad_hess(const Eigen::MatrixXd& margins,
                           std::span<const int> labels) {
  const Index n = margins.rows(), k = margins.cols();
  if (static_cast<Index>(labels.size()) != n) {
    throw ShapeError("softmax_grad_hess: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " rows");
  }
  check_labels(labels, static_cast<int>(k));
  GradHess out{Eigen::MatrixXd(n, k), Eigen::MatrixXd(n, k)};
  for (Index i = 0; i < n; ++i) {
    const double top = margins.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (margins.row(i).array() - top).exp();
    const Eigen::RowVectorXd p = e / e.sum();
    for (Index c = 0; c < k; ++c) {
      out.g(i, c) = p[c] - (labels[i] == c ? 1.0 : 0.0);
      out.h(i, c) = p[c] * (1.0 - p[c]);
    }
  }
  return out;
}

double log_loss(const Eigen::MatrixXd& margins, std::span<const int> labels) {
  const Index n = margins.rows();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double top = margins.row(i).maxCoeff();
    const double lse = top + std::log((margins.row(i).array() - top).exp().sum());
    total += lse - margins(i, labels[i]);
  }
  return total / static_cast<double>(n);
}

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double leaf_weight(double G, double H, const GBMConfig& config) {
  const double t = soft_threshold(G, config.alpha_l1);
  const double denom = H + config.lambda_l2;
  if (t == 0.0 || denom <= 0.0) return 0.0;
  return -t / denom;
}

namespace {
double node_score(double G, double H, const GBMConfig& config) {
  const double t = soft_threshold(G, config.alpha_l1);
  const double denom = H + config.lambda_l2;
  return denom > 0.0 ? t * t / denom : 0.0;
}
}  // namespace

double split_gain(double GL, double HL, double GR, double HR,
                  const GBMConfig& config) {
  return 0.5 * (node_score(GL, HL, config) + node_score(GR, HR, config) -
                node_score(GL + GR, HL + HR, config)) -
         config.gamma_min_gain;
}

float midpoint_threshold(float lo, float hi) {
  const float mid =
      static_cast<float>(0.5 * (static_cast<double>(lo) + static_cast<double>(hi)));
  return mid > lo ? mid : hi;
}

Tree grow_tree(const RowMatrixXf& features, std::span<const double> g,
               std::span<const double> h, const GBMConfig& config) {
  config.validate();
  if (static_cast<Index>(g.size()) != features.rows() ||
      static_cast<Index>(h.size()) != features.rows()) {
    throw ShapeError("grow_tree: gradient length does not match feature rows");
  }
  check_finite(features);
  const ColumnIndex columns(features);
  const auto gq = quantize(g);
  const auto hq = quantize(h);
  return grow_tree_impl(features, columns, gq, hq, config);
}

GBMModel fit(const RowMatrixXf& features, std::span<const int> labels,
             const GBMConfig& config, TrainingLog* log) {
  config.validate();
  const Index n = features.rows();
  const int k = config.num_classes;
  if (n == 0) throw DataError("fit: empty dataset");
  if (static_cast<Index>(labels.size()) != n) {
    throw ShapeError("fit: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  if (n < k) {
    throw DataError("fit: need at least num_classes rows, got " +
                    std::to_string(n));
  }
  check_labels(labels, k);
  check_finite(features);

  GBMModel model;
  model.config = config;
  model.feature_count = static_cast<int>(features.cols());
  model.base_margin.assign(static_cast<std::size_t>(k), 0.0);

  Eigen::MatrixXd margins(n, k);
  for (int c = 0; c < k; ++c) margins.col(c).setConstant(model.base_margin[c]);
  if (log) log->loss = {log_loss(margins, labels)};

  const ColumnIndex columns(features);
  for (int round = 0; round < config.n_rounds; ++round) {
    const GradHess gh = softmax_grad_hess(margins, labels);
    const std::size_t first = model.trees.size();
    for (int c = 0; c < k; ++c) {
      const auto gq = quantize(std::span(gh.g.col(c).data(), std::size_t(n)));
      const auto hq = quantize(std::span(gh.h.col(c).data(), std::size_t(n)));
      model.trees.push_back(grow_tree_impl(features, columns, gq, hq, config));
    }
    for (Index i = 0; i < n; ++i) {
      const float* row = features.row(i).data();
      for (int c = 0; c < k; ++c) {
        margins(i, c) +=
            config.learning_rate * model.trees[first + c].predict(row);
      }
    }
    if (log) log->loss.push_back(log_loss(margins, labels));
  }
  return model;
}

Eigen::MatrixXd predict_margin(const GBMModel& model,
                               const RowMatrixXf& features) {
  if (features.cols() != model.feature_count) {
    throw ShapeError("model expects " + std::to_string(model.feature_count) +
                     " features, got " + std::to_string(features.cols()));
  }
  check_finite(features);
  const int k = model.config.num_classes;
  const Index n = features.rows();
  Eigen::MatrixXd margins(n, k);
  for (int c = 0; c < k; ++c) {
    const double base =
        model.base_margin.empty() ? 0.0 : model.base_margin[c];
    margins.col(c).setConstant(base);
  }
  const double lr = model.config.learning_rate;
  for (Index i = 0; i < n; ++i) {
    const float* row = features.row(i).data();
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
      margins(i, static_cast<Index>(t % k)) += lr * model.trees[t].predict(row);
    }
  }
  return margins;
}

Eigen::MatrixXd predict_proba(const GBMModel& model,
                              const RowMatrixXf& features) {
  Eigen::MatrixXd m = predict_margin(model, features);
  for (Index i = 0; i < m.rows(); ++i) {
    const double top = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - top).exp();
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

std::vector<int> predict_class(const GBMModel& model,
                               const RowMatrixXf& features) {
  const Eigen::MatrixXd m = predict_margin(model, features);
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    int best = 0;
    for (Index c = 1; c < m.cols(); ++c) {
      if (m(i, c) > m(i, best)) best = static_cast<int>(c);
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::uint8_t> save_model(const GBMModel& model) {
  for (double b : model.base_margin) {
    if (b != 0.0) throw InvalidArgument("save_model: base margins must be zero");
  }
  const GBMConfig& c = model.config;
  ByteWriter out;
  out.put_magic(kMagic);
  out.put_u32(kModelFormatVersion);
  out.put_f64(c.learning_rate);
  out.put_f64(c.lambda_l2);
  out.put_f64(c.alpha_l1);
  out.put_f64(c.gamma_min_gain);
  out.put_u32(static_cast<std::uint32_t>(c.max_depth));
  out.put_u32(static_cast<std::uint32_t>(c.n_rounds));
  out.put_f64(c.min_child_weight);
  out.put_u32(static_cast<std::uint32_t>(c.num_classes));
  out.put_u64(c.seed);
  out.put_u32(static_cast<std::uint32_t>(model.feature_count));
  out.put_u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const Tree& tree : model.trees) write_tree(out, tree, 0);
  return out.release();
}

GBMModel load_model(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic(kMagic);
  const std::uint32_t version = in.u32("version");
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError("unsupported DFGB version " +
                                  std::to_string(version));
  }
  GBMModel model;
  GBMConfig& c = model.config;
  c.learning_rate = in.f64("learning_rate");
  c.lambda_l2 = in.f64("lambda_l2");
  c.alpha_l1 = in.f64("alpha_l1");
  c.gamma_min_gain = in.f64("gamma_min_gain");
  c.max_depth = static_cast<int>(in.u32("max_depth"));
  c.n_rounds = static_cast<int>(in.u32("n_rounds"));
  c.min_child_weight = in.f64("min_child_weight");
  c.num_classes = static_cast<int>(in.u32("num_classes"));
  c.seed = in.u64("seed");
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatInvariantError(std::string("model config: ") + e.what());
  }
  model.feature_count = static_cast<int>(in.u32("feature_count"));
  const std::uint32_t tree_count = in.u32("tree count");
  if (tree_count % static_cast<std::uint32_t>(c.num_classes) != 0) {
    throw FormatInvariantError("tree count " + std::to_string(tree_count) +
                               " is not a multiple of num_classes");
  }
  model.base_margin.assign(static_cast<std::size_t>(c.num_classes), 0.0);
  for (std::uint32_t t = 0; t < tree_count; ++t) {
    Tree tree;
    read_tree(in, tree, 0, model.feature_count,
              "tree #" + std::to_string(t));
    model.trees.push_back(std::move(tree));
  }
  if (!in.at_end()) throw FormatInvariantError("trailing bytes after last tree");
  return model;
}

}  // namespace deepsent::gbm
