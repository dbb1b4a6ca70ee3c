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

#ifndef DEEPSENT_INGEST_HPP_
#define DEEPSENT_INGEST_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepsent/labels.hpp"
#include "deepsent/tensor.hpp"

namespace deepsent::ingest {

struct ManifestEntry {
  std::string path;
  SentimentLabel label;
};

// CSV with header `path,label`. The label is the text after the last comma,
// so paths may contain commas. Blank lines are skipped; any other problem
// raises DataError naming the 1-based line.
std::vector<ManifestEntry> parse_manifest(std::string_view text);

// Relative entry paths resolve against the manifest's directory.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest,
                                         const ManifestEntry& entry);

struct DatasetStats {
  std::array<std::int64_t, kNumSentimentClasses> counts = {0, 0, 0};
  std::int64_t total = 0;
};

DatasetStats dataset_stats(std::span<const ManifestEntry> entries);

// Interleaved 8-bit RGB, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

// Binary P6 with maxval 255. Wrong magic, other maxvals and short payloads
// raise BadMagicError, FormatInvariantError and TruncatedError.
ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image);

inline constexpr int kTargetSize = 224;

// Bilinear resampling with half-pixel centres:
//   src = (dst + 0.5) * (in / out) - 0.5, clamped to [0, in - 1],
// rounded to the nearest 8-bit value. Equal sizes reproduce the input.
ImageBuffer resize_bilinear(const ImageBuffer& image,
                            int width = kTargetSize, int height = kTargetSize);

struct PreprocessConfig {
  int target_width = kTargetSize;
  int target_height = kTargetSize;
  std::array<float, 3> channel_mean = {0.485f, 0.456f, 0.406f};
  std::array<float, 3> channel_std = {0.229f, 0.224f, 0.225f};

  void validate() const;
};

// 224x224 interleaved RGB -> [3,224,224] planar, (pixel/255 - mean) / std.
Tensor normalize(const ImageBuffer& image, const PreprocessConfig& config);

// decode_ppm -> resize_bilinear -> normalize.
Tensor preprocess_ppm(std::span<const std::uint8_t> bytes,
                      const PreprocessConfig& config);

inline constexpr Index kFeatureDim = 2048;
inline constexpr std::uint32_t kCacheFormatVersion = 1;

// Deep features plus labels; the hand-off between extraction and training.
struct FeatureCache {
  RowMatrixXf values;  // n_rows x 2048
  std::vector<int> labels;

  Index rows() const { return values.rows(); }
};

// DFFC layout: "DFFC", u32 version, u64 n_rows, u64 n_cols, n_rows x i32
// labels, then row-major float32 values; little-endian.
std::vector<std::uint8_t> write_feature_cache(const FeatureCache& cache);
FeatureCache read_feature_cache(std::span<const std::uint8_t> bytes);

}  // namespace deepsent::ingest

#endif  // DEEPSENT_INGEST_HPP_
