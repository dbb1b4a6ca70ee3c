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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "deepsent/binary_io.hpp"
#include "deepsent/cli.hpp"
#include "deepsent/errors.hpp"
#include "deepsent/labels.hpp"
#include "deepsent/resnet50.hpp"

namespace deepsent::cli {
namespace {

using nlohmann::ordered_json;

constexpr Index kExtractBatch = 8;

void require_path(const std::string& value, const char* name) {
  if (value.empty()) throw InvalidArgument(std::string("missing required ") + name);
}

resnet::Model load_model_from(const std::string& weights_path) {
  const auto bytes = read_file(weights_path);
  return resnet::build_model(resnet::load_weights(bytes), resnet::NetworkConfig{});
}

struct ExtractedFeatures {
  std::vector<ingest::ManifestEntry> entries;
  ingest::FeatureCache cache;
};

ExtractedFeatures extract_manifest(const RunConfig& config) {
  config.preprocess.validate();
  const resnet::Model model = load_model_from(config.weights_path);
  const std::filesystem::path manifest_path(config.manifest_path);
  ExtractedFeatures result;
  result.entries = ingest::parse_manifest(read_text_file(manifest_path));
  const auto n = static_cast<Index>(result.entries.size());
  result.cache.values.resize(n, ingest::kFeatureDim);
  result.cache.labels.resize(result.entries.size());
  for (Index start = 0; start < n; start += kExtractBatch) {
    const Index stop = std::min(n, start + kExtractBatch);
    std::vector<Tensor> images;
    for (Index i = start; i < stop; ++i) {
      const auto& entry = result.entries[i];
      const auto bytes = read_file(ingest::resolve_entry_path(manifest_path, entry));
      try {
        images.push_back(ingest::preprocess_ppm(bytes, config.preprocess));
      } catch (const Error& e) {
        throw DataError("image '" + entry.path + "': " + e.what());
      }
      result.cache.labels[i] = static_cast<int>(entry.label);
    }
    const Tensor features =
        model.extract_features(stack<float>(std::span<const Tensor>(images)));
    result.cache.values.middleRows(start, stop - start) =
        features.matrix(stop - start, ingest::kFeatureDim);
  }
  return result;
}

ingest::FeatureCache load_cache(const std::string& path) {
  return ingest::read_feature_cache(read_file(path));
}

void require_all_classes(std::span<const int> labels, int num_classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw DataError("label " + std::to_string(l) + " outside [0," +
                      std::to_string(num_classes) + ")");
    }
    ++counts[l];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw DataError("class '" + std::string(class_name(c)) +
                      "' is absent from the feature cache");
    }
  }
}

ordered_json class_counts_json(std::span<const int> labels) {
  std::array<std::int64_t, kNumSentimentClasses> counts{};
  for (int l : labels) {
    if (l >= 0 && l < kNumSentimentClasses) ++counts[l];
  }
  ordered_json doc;
  for (int c = 0; c < kNumSentimentClasses; ++c) {
    doc[std::string(class_name(c))] = counts[c];
  }
  doc["total"] = labels.size();
  return doc;
}

std::string derive_roc_path(const RunConfig& config) {
  if (!config.roc_path.empty()) return config.roc_path;
  std::filesystem::path p(config.report_path);
  p.replace_extension(".roc.csv");
  return p.string();
}

std::string format_percent(double fraction) {
  std::ostringstream os;
  os << std::llround(fraction * 100.0) << "%";
  return os.str();
}

}  // namespace

int report_failure(std::ostream& err) {
  try {
    throw;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputMissing;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

int cmd_extract(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    require_path(config.weights_path, "weights_path");
    require_path(config.manifest_path, "manifest_path");
    require_path(config.cache_path, "cache_path");
    const ExtractedFeatures extracted = extract_manifest(config);
    write_file_atomic(config.cache_path,
                      ingest::write_feature_cache(extracted.cache));
    ordered_json summary;
    summary["rows"] = extracted.cache.rows();
    summary["columns"] = ingest::kFeatureDim;
    summary["class_counts"] = class_counts_json(extracted.cache.labels);
    summary["config"] = config_echo(config);
    out << summary.dump(2) << '\n';
    return kExitOk;
  } catch (...) {
    return report_failure(err);
  }
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    require_path(config.cache_path, "cache_path");
    require_path(config.model_path, "model_path");
    config.gbm.validate();
    if (!config.gbm.learning_rate_in_tuning_range()) {
      err << "warning: learning_rate " << config.gbm.learning_rate
          << " is outside the tuned range [0.05, 0.3]\n";
    }
    const ingest::FeatureCache cache = load_cache(config.cache_path);
    gbm::TrainingLog log;
    const gbm::GBMModel model =
        gbm::fit(cache.values, cache.labels, config.gbm, &log);
    write_file_atomic(config.model_path, gbm::save_model(model));
    ordered_json summary;
    summary["rounds_completed"] = model.rounds_completed();
    summary["final_train_log_loss"] = log.loss.back();
    summary["rows"] = cache.rows();
    summary["config"] = config_echo(config);
    out << summary.dump(2) << '\n';
    return kExitOk;
  } catch (...) {
    return report_failure(err);
  }
}

int cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    require_path(config.cache_path, "cache_path");
    require_path(config.report_path, "report_path");
    config.gbm.validate();
    if (config.k_folds < 2) throw InvalidArgument("k_folds must be >= 2");
    if (!config.gbm.learning_rate_in_tuning_range()) {
      err << "warning: learning_rate " << config.gbm.learning_rate
          << " is outside the tuned range [0.05, 0.3]\n";
    }
    const ingest::FeatureCache cache = load_cache(config.cache_path);
    require_all_classes(cache.labels, config.gbm.num_classes);
    const eval::CrossValidationResult cv = eval::cross_validate(
        cache.values, cache.labels, config.gbm, config.k_folds, config.seed,
        config.dataset);
    const ordered_json report = report_json(cv, config);
    write_text_file_atomic(derive_roc_path(config), roc_csv(cv.pooled));
    write_text_file_atomic(config.report_path, report.dump(2) + "\n");
    ordered_json summary;
    summary["dataset"] = config.dataset;
    summary["accuracy"] = cv.accuracy.mean;
    summary["accuracy_std"] = cv.accuracy.stddev;
    summary["fold_accuracies"] = cv.fold_accuracies;
    out << summary.dump(2) << '\n';
    return kExitOk;
  } catch (...) {
    return report_failure(err);
  }
}

int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    require_path(config.model_path, "model_path");
    const gbm::GBMModel model = gbm::load_model(read_file(config.model_path));
    RowMatrixXf features;
    std::vector<std::string> names;
    if (!config.cache_path.empty()) {
      ingest::FeatureCache cache = load_cache(config.cache_path);
      features = std::move(cache.values);
      for (Index i = 0; i < features.rows(); ++i) {
        names.push_back("row" + std::to_string(i));
      }
    } else {
      require_path(config.weights_path, "weights_path");
      require_path(config.manifest_path, "manifest_path");
      ExtractedFeatures extracted = extract_manifest(config);
      features = std::move(extracted.cache.values);
      for (const auto& e : extracted.entries) names.push_back(e.path);
    }
    if (features.cols() != model.feature_count) {
      throw DataError("feature count mismatch: model expects " +
                      std::to_string(model.feature_count) + " features, input has " +
                      std::to_string(features.cols()));
    }
    if (model.config.num_classes != kNumSentimentClasses) {
      throw DataError("prediction output needs a 3-class model");
    }
    const Eigen::MatrixXd proba = gbm::predict_proba(model, features);
    const std::vector<int> predicted = gbm::predict_class(model, features);
    std::ostringstream csv;
    csv << "path,negative,neutral,positive,predicted\n" << std::setprecision(9);
    for (Index i = 0; i < proba.rows(); ++i) {
      csv << names[i];
      for (int c = 0; c < kNumSentimentClasses; ++c) csv << ',' << proba(i, c);
      csv << ',' << class_name(predicted[i]) << '\n';
    }
    if (config.output_path.empty()) {
      out << csv.str();
    } else {
      write_text_file_atomic(config.output_path, csv.str());
    }
    return kExitOk;
  } catch (...) {
    return report_failure(err);
  }
}

int cmd_compare(const std::vector<std::string>& report_paths, std::ostream& out,
                std::ostream& err) {
  struct Row {
    std::string method, dataset, accuracy;
  };
  std::vector<Row> rows;
  for (const auto& b : literature_baselines()) {
    rows.push_back({std::string(b.method) + " (" + std::to_string(b.year) +
                        ", literature)",
                    std::string(b.dataset), std::string(b.display)});
  }
  int readable = 0;
  for (const auto& path : report_paths) {
    try {
      const auto doc = nlohmann::json::parse(read_text_file(path));
      rows.push_back({"Deep ResNet50 features + gradient boosting",
                      doc.at("dataset").get<std::string>(),
                      format_percent(doc.at("accuracy").get<double>())});
      ++readable;
    } catch (const std::exception& e) {
      err << "warning: skipping report '" << path << "': " << e.what() << '\n';
    }
  }
  if (readable == 0) {
    err << "error: no readable reports\n";
    return kExitInputMissing;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.dataset < b.dataset; });
  std::size_t wm = 6, wd = 7;
  for (const auto& r : rows) {
    wm = std::max(wm, r.method.size());
    wd = std::max(wd, r.dataset.size());
  }
  auto line = [&](const std::string& m, const std::string& d, const std::string& a) {
    out << std::left << std::setw(static_cast<int>(wm)) << m << "  "
        << std::setw(static_cast<int>(wd)) << d << "  " << a << '\n';
  };
  line("Method", "Dataset", "Accuracy");
  for (const auto& r : rows) line(r.method, r.dataset, r.accuracy);
  return kExitOk;
}

}  // namespace deepsent::cli
