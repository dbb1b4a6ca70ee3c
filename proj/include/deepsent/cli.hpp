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

#ifndef DEEPSENT_CLI_HPP_
#define DEEPSENT_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "deepsent/evalkit.hpp"
#include "deepsent/gbm.hpp"
#include "deepsent/ingest.hpp"

namespace deepsent::cli {

// Process exit codes; stable for scripting.
enum ExitCode : int {
  kExitOk = 0,
  kExitDataError = 1,     // validation or data problems
  kExitInputMissing = 2,  // missing or unreadable inputs
};

struct RunConfig {
  std::string weights_path;
  std::string manifest_path;
  std::string cache_path;
  std::string model_path;
  std::string report_path;
  std::string output_path;  // predict CSV; stdout when empty
  std::string roc_path;     // cv ROC CSV; derived from report_path when empty
  std::string dataset = "dataset";
  gbm::GBMConfig gbm;
  ingest::PreprocessConfig preprocess;
  int k_folds = 10;
  std::uint64_t seed = 0;
};

// Overlays the keys present in `doc` onto `base`. Unknown keys raise
// InvalidArgument so typos do not pass silently.
RunConfig merge_run_config(RunConfig base, const nlohmann::json& doc);
RunConfig load_run_config_file(const std::string& path, RunConfig base = {});

// Every setting that shaped a run, including the normalisation constants
// and all boosting hyperparameters.
nlohmann::ordered_json config_echo(const RunConfig& config);

nlohmann::ordered_json report_json(const eval::CrossValidationResult& cv,
                                   const RunConfig& config);
// `class,threshold,fpr,tpr`, one block per class.
std::string roc_csv(const eval::MetricsReport& report);

struct BaselineRow {
  std::string_view method;
  std::string_view dataset;
  double accuracy;  // fraction
  std::string_view display;
  int year;
};

// Published accuracies of earlier visual-sentiment methods, transcribed as
// fixed reference data. Never recomputed.
std::span<const BaselineRow> literature_baselines();

// Each command returns an ExitCode and never leaves partial output files.
int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const std::vector<std::string>& report_paths, std::ostream& out,
                std::ostream& err);

// Maps a thrown exception to an exit code and prints it to `err`.
int report_failure(std::ostream& err);

}  // namespace deepsent::cli

#endif  // DEEPSENT_CLI_HPP_
