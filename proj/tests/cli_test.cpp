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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include "gtest/gtest.h"

#include "deepsent/binary_io.hpp"
#include "deepsent/cli.hpp"
#include "deepsent/errors.hpp"
#include "deepsent/resnet50.hpp"

namespace deepsent::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("deepsent_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static const std::string& weights_file() {
    static const std::string file = [] {
      const fs::path p = fs::temp_directory_path() / "deepsent_cli_weights.dfws";
      write_file_atomic(p, resnet::save_weights(resnet::random_weight_store({}, 5)));
      return p.string();
    }();
    return file;
  }

  // Writes PPM images of assorted sizes plus a manifest; returns its path.
  std::string write_images(const std::vector<std::string>& labels) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> px(0, 255), size(40, 260);
    fs::create_directories(dir_ / "images");
    std::string manifest = "path,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ingest::ImageBuffer img{size(rng), size(rng), {}};
      img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
      for (auto& p : img.pixels) p = static_cast<std::uint8_t>(px(rng));
      const std::string name = "img" + std::to_string(i) + ".ppm";
      write_file_atomic(dir_ / "images" / name, ingest::encode_ppm(img));
      manifest += "images/" + name + "," + labels[i] + "\n";
    }
    write_text_file_atomic(dir_ / "manifest.csv", manifest);
    return path("manifest.csv");
  }

  // Feature cache whose first `informative` columns carry the class signal.
  std::string write_cache(const std::string& name, std::array<int, 3> counts, float shift,
                          int informative = 8, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n;
    ingest::FeatureCache cache;
    const int rows = counts[0] + counts[1] + counts[2];
    cache.values = RowMatrixXf::Zero(rows, ingest::kFeatureDim);
    int r = 0;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < counts[c]; ++i, ++r) {
        for (int j = 0; j < informative; ++j) cache.values(r, j) = n(rng) + (j == c ? shift : 0.0f);
        cache.labels.push_back(c);
      }
    write_file_atomic(dir_ / name, ingest::write_feature_cache(cache));
    return path(name);
  }

  static std::vector<std::string> csv_rows(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) rows.push_back(line);
    return rows;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
    return cells;
  }

  fs::path dir_;
};

TEST_F(CliTest, ExtractWritesOneRowPerImageDeterministically) {
  RunConfig cfg;
  cfg.weights_path = weights_file();
  cfg.manifest_path = write_images({"negative", "positive", "Neutral", "negative", "POSITIVE"});
  cfg.cache_path = path("a.dffc");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_extract(cfg, out, err), kExitOk) << err.str();
  const auto cache = ingest::read_feature_cache(read_file(cfg.cache_path));
  EXPECT_EQ(cache.rows(), 5);
  EXPECT_EQ(cache.values.cols(), 2048);
  EXPECT_EQ(cache.labels, (std::vector<int>{0, 2, 1, 0, 2}));
  const auto summary = nlohmann::json::parse(out.str());
  EXPECT_EQ(summary["class_counts"]["negative"], 2);
  EXPECT_EQ(summary["class_counts"]["neutral"], 1);
  EXPECT_EQ(summary["class_counts"]["positive"], 2);
  EXPECT_TRUE(summary["config"]["preprocess"].contains("channel_mean"));

  cfg.cache_path = path("b.dffc");
  std::ostringstream out2;
  ASSERT_EQ(cmd_extract(cfg, out2, err), kExitOk) << err.str();
  EXPECT_EQ(read_file(path("a.dffc")), read_file(path("b.dffc")));

  // Image input goes through the same extraction as the cache.
  cfg.cache_path = path("a.dffc");
  cfg.model_path = path("m.dfgb");
  cfg.gbm.n_rounds = 3;
  cfg.gbm.min_child_weight = 0.0;
  ASSERT_EQ(cmd_train(cfg, out2, err), kExitOk) << err.str();
  std::ostringstream from_cache, from_images;
  ASSERT_EQ(cmd_predict(cfg, from_cache, err), kExitOk) << err.str();
  cfg.cache_path.clear();
  ASSERT_EQ(cmd_predict(cfg, from_images, err), kExitOk) << err.str();
  const auto a = csv_rows(from_cache.str()), b = csv_rows(from_images.str());
  ASSERT_EQ(a.size(), 6u);
  ASSERT_EQ(b.size(), 6u);
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_EQ(split(b[i])[0], "images/img" + std::to_string(i - 1) + ".ppm");
    EXPECT_EQ(a[i].substr(a[i].find(',')), b[i].substr(b[i].find(',')));
  }
}

TEST_F(CliTest, ExtractFailuresLeaveNoCache) {
  RunConfig cfg;
  cfg.weights_path = path("missing.dfws");
  cfg.manifest_path = write_images({"negative"});
  cfg.cache_path = path("out.dffc");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_extract(cfg, out, err), kExitInputMissing);
  EXPECT_FALSE(fs::exists(cfg.cache_path));
  EXPECT_NE(err.str().find("missing.dfws"), std::string::npos);

  write_text_file_atomic(cfg.manifest_path, "path,label\nimages/img0.ppm,happy\n");
  cfg.weights_path = weights_file();
  EXPECT_EQ(cmd_extract(cfg, out, err), kExitDataError);
  EXPECT_FALSE(fs::exists(cfg.cache_path));

  write_text_file_atomic(cfg.manifest_path, "path,label\nimages/nope.ppm,neutral\n");
  EXPECT_EQ(cmd_extract(cfg, out, err), kExitInputMissing);
  EXPECT_FALSE(fs::exists(cfg.cache_path));
  for (const auto& e : fs::directory_iterator(dir_))
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos) << e.path();
}

TEST_F(CliTest, TrainWarnsOutsideTuningRangeAndIsDeterministic) {
  RunConfig cfg;
  cfg.cache_path = write_cache("train.dffc", {20, 20, 20}, 3.0f);
  cfg.model_path = path("m1.dfgb");
  cfg.gbm.n_rounds = 5;
  cfg.gbm.learning_rate = 0.5;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(cfg, out, err), kExitOk) << err.str();
  EXPECT_NE(err.str().find("[0.05, 0.3]"), std::string::npos) << err.str();
  const auto summary = nlohmann::json::parse(out.str());
  EXPECT_EQ(summary["rounds_completed"], 5);
  EXPECT_TRUE(summary.contains("final_train_log_loss"));
  EXPECT_EQ(summary["config"]["gbm"]["learning_rate"], 0.5);

  cfg.model_path = path("m2.dfgb");
  std::ostringstream out2, err2;
  ASSERT_EQ(cmd_train(cfg, out2, err2), kExitOk);
  EXPECT_EQ(read_file(path("m1.dfgb")), read_file(path("m2.dfgb")));

  cfg.gbm.learning_rate = 0.1;
  std::ostringstream err3;
  ASSERT_EQ(cmd_train(cfg, out2, err3), kExitOk);
  EXPECT_EQ(err3.str(), "");
}

TEST_F(CliTest, ZeroRoundModelPredictsNegativeEverywhere) {
  RunConfig cfg;
  cfg.cache_path = write_cache("train.dffc", {5, 5, 5}, 3.0f);
  cfg.model_path = path("empty.dfgb");
  cfg.gbm.n_rounds = 0;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(cfg, out, err), kExitOk) << err.str();
  std::ostringstream csv;
  ASSERT_EQ(cmd_predict(cfg, csv, err), kExitOk) << err.str();
  const auto rows = csv_rows(csv.str());
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[0], "path,negative,neutral,positive,predicted");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[4], "negative");
    for (int c = 1; c <= 3; ++c) EXPECT_NEAR(std::stod(cells[c]), 1.0 / 3.0, 1e-8);
  }
}

TEST_F(CliTest, PredictReproducesConvergedTrainingLabels) {
  RunConfig cfg;
  cfg.cache_path = write_cache("train.dffc", {15, 10, 20}, 8.0f);
  cfg.model_path = path("m.dfgb");
  cfg.output_path = path("pred.csv");
  cfg.gbm.n_rounds = 30;
  cfg.gbm.learning_rate = 0.3;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(cfg, out, err), kExitOk) << err.str();
  ASSERT_EQ(cmd_predict(cfg, out, err), kExitOk) << err.str();
  const auto cache = ingest::read_feature_cache(read_file(cfg.cache_path));
  const auto rows = csv_rows(read_text_file(cfg.output_path));
  ASSERT_EQ(rows.size(), cache.labels.size() + 1);
  for (std::size_t i = 0; i < cache.labels.size(); ++i) {
    const auto cells = split(rows[i + 1]);
    EXPECT_EQ(cells[4], class_name(cache.labels[i]));
    EXPECT_NEAR(std::stod(cells[1]) + std::stod(cells[2]) + std::stod(cells[3]), 1.0, 1e-6);
  }
}

TEST_F(CliTest, PredictFailuresWriteNothing) {
  RunConfig cfg;
  cfg.cache_path = write_cache("train.dffc", {5, 5, 5}, 3.0f);
  cfg.model_path = path("m.dfgb");
  cfg.output_path = path("pred.csv");
  cfg.gbm.n_rounds = 1;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(cfg, out, err), kExitOk);

  auto bytes = read_file(cfg.cache_path);
  bytes.resize(bytes.size() / 2);
  write_file_atomic(path("broken.dffc"), bytes);
  cfg.cache_path = path("broken.dffc");
  EXPECT_NE(cmd_predict(cfg, out, err), kExitOk);
  EXPECT_FALSE(fs::exists(cfg.output_path));

  gbm::GBMModel narrow;
  narrow.feature_count = 10;
  narrow.base_margin = {0, 0, 0};
  write_file_atomic(path("narrow.dfgb"), gbm::save_model(narrow));
  cfg.cache_path = path("train.dffc");
  cfg.model_path = path("narrow.dfgb");
  std::ostringstream err2;
  EXPECT_EQ(cmd_predict(cfg, out, err2), kExitDataError);
  EXPECT_NE(err2.str().find("model expects 10"), std::string::npos) << err2.str();
  EXPECT_FALSE(fs::exists(cfg.output_path));
}

TEST_F(CliTest, CrossValidationOnSeparableCache) {
  RunConfig cfg;
  cfg.cache_path = write_cache("sep.dffc", {20, 20, 20}, 12.0f, 4);
  cfg.report_path = path("report.json");
  cfg.dataset = "toy";
  cfg.k_folds = 5;
  cfg.gbm.n_rounds = 10;
  cfg.gbm.learning_rate = 0.3;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_cv(cfg, out, err), kExitOk) << err.str();
  const auto report = nlohmann::ordered_json::parse(read_text_file(cfg.report_path));
  std::vector<std::string> keys;
  for (const auto& [k, v] : report.items()) keys.push_back(k);
  ASSERT_GE(keys.size(), 5u);
  EXPECT_EQ(std::vector<std::string>(keys.begin(), keys.begin() + 5),
            (std::vector<std::string>{"dataset", "classes", "accuracy", "confusion", "fold_accuracies"}));
  EXPECT_EQ(report["dataset"], "toy");
  EXPECT_EQ(report["accuracy"], 1.0);
  EXPECT_EQ(report["accuracy_std"], 0.0);
  EXPECT_EQ(report["fold_accuracies"].size(), 5u);
  for (const char* cls : {"negative", "neutral", "positive"}) {
    std::vector<std::string> metric_keys;
    for (const auto& [k, v] : report["classes"][cls].items()) metric_keys.push_back(k);
    EXPECT_EQ(metric_keys, (std::vector<std::string>{"precision", "recall", "f1", "auc"}));
    EXPECT_EQ(report["classes"][cls]["auc"], 1.0);
  }
  EXPECT_EQ(report["confusion"], nlohmann::ordered_json::parse("[[20,0,0],[0,20,0],[0,0,20]]"));
  EXPECT_TRUE(report["config"]["preprocess"].contains("channel_std"));
  EXPECT_EQ(report["config"]["gbm"]["n_rounds"], 10);

  const std::string roc = read_text_file(path("report.roc.csv"));
  EXPECT_EQ(roc.rfind("class,threshold,fpr,tpr\n", 0), 0u);
  EXPECT_NE(roc.find("negative,inf,0,0"), std::string::npos);
}

TEST_F(CliTest, CrossValidationOnGapedSizedCache) {
  RunConfig cfg;
  cfg.cache_path = write_cache("gaped.dffc", {520, 90, 122}, 1.5f, 6);
  cfg.report_path = path("gaped.json");
  cfg.gbm.n_rounds = 2;
  cfg.gbm.max_depth = 2;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_cv(cfg, out, err), kExitOk) << err.str();
  const auto report = nlohmann::json::parse(read_text_file(cfg.report_path));
  EXPECT_EQ(report["fold_accuracies"].size(), 10u);
  std::int64_t total = 0;
  for (const auto& row : report["confusion"])
    for (const auto& v : row) total += v.get<std::int64_t>();
  EXPECT_EQ(total, 732);

  const auto cache = ingest::read_feature_cache(read_file(cfg.cache_path));
  const auto folds = eval::stratified_kfold(cache.labels, 10, cfg.seed);
  for (int f = 0; f < 10; ++f) {
    const auto n = folds.test_indices(f).size();
    EXPECT_TRUE(n == 73 || n == 74) << n;
  }
}

TEST_F(CliTest, CrossValidationNeedsEveryClass) {
  RunConfig cfg;
  cfg.cache_path = write_cache("two.dffc", {10, 0, 10}, 3.0f);
  cfg.report_path = path("r.json");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_cv(cfg, out, err), kExitDataError);
  EXPECT_NE(err.str().find("neutral"), std::string::npos) << err.str();
  EXPECT_FALSE(fs::exists(cfg.report_path));
  EXPECT_FALSE(fs::exists(path("r.roc.csv")));
}

TEST_F(CliTest, CompareRendersReportsBesideBaselines) {
  EXPECT_EQ(literature_baselines().size(), 6u);
  write_text_file_atomic(dir_ / "cf.json", R"({"dataset": "CrowdFlower", "accuracy": 0.87})");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_compare({path("cf.json"), path("absent.json")}, out, err), kExitOk);
  const std::string table = out.str();
  for (const char* cell : {"87%", "60.86%", "73%", "75%", "73.80%", "76.01%", "74%"})
    EXPECT_NE(table.find(cell), std::string::npos) << cell;
  EXPECT_NE(err.str().find("absent.json"), std::string::npos);
  // The new row sits with the other CrowdFlower rows.
  const auto ours = table.find("87%");
  const auto first_cf = table.find("CrowdFlower");
  const auto last_cf = table.rfind("CrowdFlower");
  EXPECT_LT(first_cf, ours);
  EXPECT_LT(ours, table.find('\n', last_cf) + 1);

  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_compare({path("absent.json")}, out2, err2), kExitInputMissing);
  write_text_file_atomic(dir_ / "bad.json", "{not json");
  EXPECT_EQ(cmd_compare({path("bad.json")}, out2, err2), kExitInputMissing);
}

TEST(RunConfigMerge, OverlaysAndRejectsUnknownKeys) {
  const RunConfig merged = merge_run_config(
      {}, nlohmann::json::parse(R"({"k_folds": 5, "gbm": {"max_depth": 3},
                                   "preprocess": {"channel_mean": [0.5, 0.5, 0.5]}})"));
  EXPECT_EQ(merged.k_folds, 5);
  EXPECT_EQ(merged.gbm.max_depth, 3);
  EXPECT_EQ(merged.gbm.n_rounds, 200);
  EXPECT_EQ(merged.preprocess.channel_mean[1], 0.5f);
  EXPECT_THROW(merge_run_config({}, nlohmann::json::parse(R"({"kfolds": 5})")), InvalidArgument);
  EXPECT_THROW(merge_run_config({}, nlohmann::json::parse(R"({"gbm": {"eta": 0.1}})")),
               InvalidArgument);
  EXPECT_THROW(merge_run_config({}, nlohmann::json::parse(R"({"k_folds": "ten"})")),
               InvalidArgument);
}

int run_tool(const std::string& args, const fs::path& stdout_file) {
  const std::string command = std::string("\"") + DEEPSENT_TOOL + "\" " + args + " > \"" +
                              stdout_file.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryFlagsOverrideConfigFile) {
  const std::string cache = write_cache("train.dffc", {6, 6, 6}, 3.0f);
  write_text_file_atomic(dir_ / "run.json",
                         R"({"cache_path": ")" + cache +
                             R"(", "gbm": {"n_rounds": 0, "learning_rate": 0.1}})");
  const fs::path log = dir_ / "stdout.txt";
  ASSERT_EQ(run_tool("--config " + path("run.json") + " train --model " + path("m.dfgb") +
                         " --rounds 2",
                     log),
            0)
      << read_text_file(log);
  const auto summary = nlohmann::json::parse(read_text_file(log));
  EXPECT_EQ(summary["rounds_completed"], 2);
  EXPECT_EQ(summary["config"]["gbm"]["learning_rate"], 0.1);

  EXPECT_EQ(run_tool("--seed 9 train --cache " + cache + " --model " + path("m9.dfgb") +
                         " --rounds 1",
                     log),
            0);
  EXPECT_EQ(nlohmann::json::parse(read_text_file(log))["config"]["seed"], 9);

  write_text_file_atomic(dir_ / "typo.json", R"({"n_rounds": 3})");
  EXPECT_EQ(run_tool("--config " + path("typo.json") + " train", log), 1);
  EXPECT_EQ(run_tool("train --cache " + path("nothing.dffc") + " --model " + path("x.dfgb"), log),
            2);
  EXPECT_FALSE(fs::exists(path("x.dfgb")));
  EXPECT_EQ(run_tool("compare " + path("nothing.json"), log), 2);
}

}  // namespace
}  // namespace deepsent::cli
