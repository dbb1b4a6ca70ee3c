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

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "deepsent/binary_io.hpp"
#include "deepsent/cli.hpp"
#include "deepsent/errors.hpp"
#include "deepsent/labels.hpp"

namespace deepsent::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& doc, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) {
      throw InvalidArgument("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void take(const json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

std::string class_label(int c) { return std::string(class_name(c)); }

ordered_json class_block(double p, double r, double f1, double auc) {
  ordered_json b;
  b["precision"] = p;
  b["recall"] = r;
  b["f1"] = f1;
  b["auc"] = auc;
  return b;
}

}  // namespace

RunConfig merge_run_config(RunConfig base, const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("run config must be a JSON object");
  try {
    reject_unknown(doc,
                   {"weights_path", "manifest_path", "cache_path", "model_path",
                    "report_path", "output_path", "roc_path", "dataset", "gbm",
                    "preprocess", "k_folds", "seed"},
                   "run config");
    take(doc, "weights_path", base.weights_path);
    take(doc, "manifest_path", base.manifest_path);
    take(doc, "cache_path", base.cache_path);
    take(doc, "model_path", base.model_path);
    take(doc, "report_path", base.report_path);
    take(doc, "output_path", base.output_path);
    take(doc, "roc_path", base.roc_path);
    take(doc, "dataset", base.dataset);
    take(doc, "k_folds", base.k_folds);
    take(doc, "seed", base.seed);
    if (doc.contains("gbm")) {
      const json& g = doc.at("gbm");
      reject_unknown(g,
                     {"learning_rate", "lambda_l2", "alpha_l1", "gamma_min_gain",
                      "max_depth", "n_rounds", "min_child_weight", "num_classes",
                      "seed"},
                     "gbm");
      take(g, "learning_rate", base.gbm.learning_rate);
      take(g, "lambda_l2", base.gbm.lambda_l2);
      take(g, "alpha_l1", base.gbm.alpha_l1);
      take(g, "gamma_min_gain", base.gbm.gamma_min_gain);
      take(g, "max_depth", base.gbm.max_depth);
      take(g, "n_rounds", base.gbm.n_rounds);
      take(g, "min_child_weight", base.gbm.min_child_weight);
      take(g, "num_classes", base.gbm.num_classes);
      take(g, "seed", base.gbm.seed);
    }
    if (doc.contains("preprocess")) {
      const json& p = doc.at("preprocess");
      reject_unknown(p, {"channel_mean", "channel_std"}, "preprocess");
      take(p, "channel_mean", base.preprocess.channel_mean);
      take(p, "channel_std", base.preprocess.channel_std);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("run config: ") + e.what());
  }
  return base;
}

RunConfig load_run_config_file(const std::string& path, RunConfig base) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("cannot parse run config '" + path + "': " + e.what());
  }
  return merge_run_config(std::move(base), doc);
}

ordered_json config_echo(const RunConfig& config) {
  ordered_json gbm;
  gbm["learning_rate"] = config.gbm.learning_rate;
  gbm["lambda_l2"] = config.gbm.lambda_l2;
  gbm["alpha_l1"] = config.gbm.alpha_l1;
  gbm["gamma_min_gain"] = config.gbm.gamma_min_gain;
  gbm["max_depth"] = config.gbm.max_depth;
  gbm["n_rounds"] = config.gbm.n_rounds;
  gbm["min_child_weight"] = config.gbm.min_child_weight;
  gbm["num_classes"] = config.gbm.num_classes;
  gbm["seed"] = config.gbm.seed;
  ordered_json pre;
  pre["target_size"] = {config.preprocess.target_width,
                        config.preprocess.target_height};
  pre["channel_mean"] = config.preprocess.channel_mean;
  pre["channel_std"] = config.preprocess.channel_std;
  pre["resize"] = "bilinear, half-pixel centres";
  ordered_json echo;
  echo["gbm"] = gbm;
  echo["preprocess"] = pre;
  echo["k_folds"] = config.k_folds;
  echo["seed"] = config.seed;
  return echo;
}

ordered_json report_json(const eval::CrossValidationResult& cv,
                         const RunConfig& config) {
  ordered_json doc;
  doc["dataset"] = config.dataset;
  ordered_json classes, class_std;
  for (std::size_t c = 0; c < cv.classes.size(); ++c) {
    const auto& s = cv.classes[c];
    classes[class_label(static_cast<int>(c))] =
        class_block(s.precision.mean, s.recall.mean, s.f1.mean, s.auc.mean);
    class_std[class_label(static_cast<int>(c))] = class_block(
        s.precision.stddev, s.recall.stddev, s.f1.stddev, s.auc.stddev);
  }
  doc["classes"] = classes;
  doc["accuracy"] = cv.accuracy.mean;
  ordered_json confusion = ordered_json::array();
  const auto& counts = cv.pooled.confusion.counts;
  for (Index r = 0; r < counts.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Index c = 0; c < counts.cols(); ++c) row.push_back(counts(r, c));
    confusion.push_back(row);
  }
  doc["confusion"] = confusion;
  doc["fold_accuracies"] = cv.fold_accuracies;
  doc["accuracy_std"] = cv.accuracy.stddev;
  doc["class_std"] = class_std;
  double auc_sum = 0.0;
  for (const auto& s : cv.classes) auc_sum += s.auc.mean;
  doc["mean_class_auc"] =
      cv.classes.empty() ? 0.0 : auc_sum / static_cast<double>(cv.classes.size());
  doc["config"] = config_echo(config);
  return doc;
}

std::string roc_csv(const eval::MetricsReport& report) {
  std::ostringstream os;
  os << "class,threshold,fpr,tpr\n" << std::setprecision(17);
  for (std::size_t c = 0; c < report.curves.size(); ++c) {
    const auto& curve = report.curves[c];
    for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
      os << class_label(static_cast<int>(c)) << ',';
      if (std::isinf(curve.thresholds[i])) {
        os << "inf";
      } else {
        os << curve.thresholds[i];
      }
      os << ',' << curve.fpr[i] << ',' << curve.tpr[i] << '\n';
    }
  }
  return os.str();
}

}  // namespace deepsent::cli
