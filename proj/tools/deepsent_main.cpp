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

// deepsent: extract deep features, train and evaluate the boosted
// sentiment classifier.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deepsent/cli.hpp"

namespace {

using deepsent::cli::RunConfig;

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> weights, manifest, cache, model, report, output,
      roc, dataset;
  std::optional<double> learning_rate, lambda_l2, alpha_l1, gamma_min_gain,
      min_child_weight;
  std::optional<int> max_depth, n_rounds, k_folds;

  void apply(RunConfig& c) const {
    auto set = [](auto& field, const auto& opt) {
      if (opt) field = *opt;
    };
    set(c.weights_path, weights);
    set(c.manifest_path, manifest);
    set(c.cache_path, cache);
    set(c.model_path, model);
    set(c.report_path, report);
    set(c.output_path, output);
    set(c.roc_path, roc);
    set(c.dataset, dataset);
    set(c.gbm.learning_rate, learning_rate);
    set(c.gbm.lambda_l2, lambda_l2);
    set(c.gbm.alpha_l1, alpha_l1);
    set(c.gbm.gamma_min_gain, gamma_min_gain);
    set(c.gbm.min_child_weight, min_child_weight);
    set(c.gbm.max_depth, max_depth);
    set(c.gbm.n_rounds, n_rounds);
    set(c.k_folds, k_folds);
    if (seed) {
      c.seed = *seed;
      c.gbm.seed = *seed;
    }
  }
};

void add_gbm_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--learning-rate", o.learning_rate, "Shrinkage per round");
  cmd->add_option("--lambda", o.lambda_l2, "L2 leaf regularisation");
  cmd->add_option("--alpha", o.alpha_l1, "L1 leaf regularisation");
  cmd->add_option("--gamma", o.gamma_min_gain, "Minimum split gain");
  cmd->add_option("--min-child-weight", o.min_child_weight,
                  "Minimum Hessian sum per child");
  cmd->add_option("--max-depth", o.max_depth, "Maximum tree depth");
  cmd->add_option("--rounds", o.n_rounds, "Boosting rounds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-feature visual sentiment classification"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "Run configuration JSON");
  app.add_option("--seed", o.seed, "Seed for fold assignment");

  auto* extract = app.add_subcommand("extract", "Images -> 2048-d feature cache");
  extract->add_option("--weights", o.weights, "DFWS weight container");
  extract->add_option("--manifest", o.manifest, "CSV manifest (path,label)");
  extract->add_option("--cache", o.cache, "Output DFFC feature cache");

  auto* train = app.add_subcommand("train", "Feature cache -> DFGB model");
  train->add_option("--cache", o.cache, "Input DFFC feature cache");
  train->add_option("--model", o.model, "Output DFGB model");
  add_gbm_flags(train, o);

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv->add_option("--cache", o.cache, "Input DFFC feature cache");
  cv->add_option("--report", o.report, "Output metrics report JSON");
  cv->add_option("--roc", o.roc, "Output ROC CSV (default: <report>.roc.csv)");
  cv->add_option("--dataset", o.dataset, "Dataset name for the report");
  cv->add_option("--k-folds", o.k_folds, "Number of folds");
  add_gbm_flags(cv, o);

  auto* predict = app.add_subcommand("predict", "Class probabilities as CSV");
  predict->add_option("--model", o.model, "DFGB model");
  predict->add_option("--cache", o.cache, "DFFC feature cache input");
  predict->add_option("--weights", o.weights, "DFWS weights (image input)");
  predict->add_option("--manifest", o.manifest, "Manifest (image input)");
  predict->add_option("--output", o.output, "Output CSV (default: stdout)");

  std::vector<std::string> reports;
  auto* compare = app.add_subcommand("compare", "Compare reports with baselines");
  compare->add_option("reports", reports, "Metrics report JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : deepsent::cli::kExitDataError;
  }

  RunConfig config;
  if (o.config_path) {
    try {
      config = deepsent::cli::load_run_config_file(*o.config_path);
    } catch (...) {
      return deepsent::cli::report_failure(std::cerr);
    }
  }
  o.apply(config);

  if (*extract) return deepsent::cli::cmd_extract(config, std::cout, std::cerr);
  if (*train) return deepsent::cli::cmd_train(config, std::cout, std::cerr);
  if (*cv) return deepsent::cli::cmd_cv(config, std::cout, std::cerr);
  if (*predict) return deepsent::cli::cmd_predict(config, std::cout, std::cerr);
  return deepsent::cli::cmd_compare(reports, std::cout, std::cerr);
}
