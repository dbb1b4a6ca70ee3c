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

#include "deepsent/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "deepsent/binary_io.hpp"
#include "deepsent/errors.hpp"

namespace deepsent::ingest {
namespace {

constexpr std::string_view kCacheMagic = "DFFC";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string line_error(std::size_t line, const std::string& what) {
  return "manifest line " + std::to_string(line) + ": " + what;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
class PpmHeader {
 public:
  explicit PpmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  unsigned long number(const char* what) {
    skip_space_and_comments();
    unsigned long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw FormatInvariantError(std::string("PPM ") + what + " too large");
    }
    if (digits == 0) {
      if (pos_ >= bytes_.size()) {
        throw TruncatedError(std::string("PPM header ends before ") + what);
      }
      throw FormatError(std::string("PPM header: expected ") + what);
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw TruncatedError("PPM header not terminated before pixel data");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> entries;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
      const std::size_t comma = line.find(',');
      if (comma == std::string_view::npos || trim(line.substr(0, comma)) != "path" ||
          trim(line.substr(comma + 1)) != "label") {
        throw DataError(line_error(line_no, "expected header 'path,label'"));
      }
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw DataError(line_error(line_no, "missing label column"));
    }
    const std::string_view path = trim(line.substr(0, comma));
    const std::string_view token = trim(line.substr(comma + 1));
    if (path.empty()) throw DataError(line_error(line_no, "empty path"));
    const auto label = parse_label(token);
    if (!label) {
      throw DataError(line_error(line_no, "unknown label '" + std::string(token) +
                                              "'"));
    }
    entries.push_back({std::string(path), *label});
  }
  if (!header_seen) throw DataError(line_error(1, "missing header 'path,label'"));
  return entries;
}

std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest,
                                         const ManifestEntry& entry) {
  const std::filesystem::path p(entry.path);
  if (p.is_absolute()) return p;
  return manifest.parent_path() / p;
}

DatasetStats dataset_stats(std::span<const ManifestEntry> entries) {
  DatasetStats stats;
  for (const auto& e : entries) ++stats.counts[static_cast<int>(e.label)];
  stats.total = static_cast<std::int64_t>(entries.size());
  return stats;
}

ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw BadMagicError("not a binary PPM (expected 'P6')");
  }
  PpmHeader header(bytes);
  const unsigned long width = header.number("width");
  const unsigned long height = header.number("height");
  const unsigned long maxval = header.number("maxval");
  if (width == 0 || height == 0) {
    throw FormatInvariantError("PPM has an empty raster");
  }
  if (maxval != 255) {
    throw FormatInvariantError("unsupported PPM maxval " + std::to_string(maxval) +
                               " (only 255)");
  }
  const std::size_t start = header.raster_start();
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() - start < need) {
    throw TruncatedError("PPM pixel data short: need " + std::to_string(need) +
                         " bytes, have " + std::to_string(bytes.size() - start));
  }
  ImageBuffer image;
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                      bytes.begin() + static_cast<std::ptrdiff_t>(start + need));
  return image;
}

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int width, int height) {
  if (image.width < 1 || image.height < 1) {
    throw InvalidArgument("resize_bilinear: empty source image");
  }
  if (width < 1 || height < 1) {
    throw InvalidArgument("resize_bilinear: empty target size");
  }
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw ShapeError("resize_bilinear: pixel buffer does not match dimensions");
  }
  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
      const double src =
          std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      t[d] = {i0, std::min(i0 + 1, in - 1), src - i0};
    }
    return t;
  };
  const auto xs = taps(image.width, width);
  const auto ys = taps(image.height, height);
  ImageBuffer out;
  out.width = width;
  out.height = height;
  out.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  std::size_t o = 0;
  for (const Tap& ty : ys) {
    for (const Tap& tx : xs) {
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(tx.i0, ty.i0, c) * (1.0 - tx.frac) +
                           image.at(tx.i1, ty.i0, c) * tx.frac;
        const double bottom = image.at(tx.i0, ty.i1, c) * (1.0 - tx.frac) +
                              image.at(tx.i1, ty.i1, c) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
        out.pixels[o++] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

void PreprocessConfig::validate() const {
  if (target_width != kTargetSize || target_height != kTargetSize) {
    throw InvalidArgument("preprocess target size must be 224x224");
  }
  for (float s : channel_std) {
    if (!(s > 0.0f)) throw InvalidArgument("channel_std must be positive");
  }
}

Tensor normalize(const ImageBuffer& image, const PreprocessConfig& config) {
  config.validate();
  if (image.width != config.target_width || image.height != config.target_height) {
    throw ShapeError("normalize: expected a " + std::to_string(config.target_width) +
                     "x" + std::to_string(config.target_height) + " image, got " +
                     std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  }
  const Index plane = static_cast<Index>(image.width) * image.height;
  Tensor out({3, image.height, image.width});
  for (Index p = 0; p < plane; ++p) {
    for (int c = 0; c < 3; ++c) {
      const float v = static_cast<float>(image.pixels[p * 3 + c]) / 255.0f;
      out[c * plane + p] = (v - config.channel_mean[c]) / config.channel_std[c];
    }
  }
  return out;
}

Tensor preprocess_ppm(std::span<const std::uint8_t> bytes,
                      const PreprocessConfig& config) {
  return normalize(
      resize_bilinear(decode_ppm(bytes), config.target_width, config.target_height),
      config);
}

std::vector<std::uint8_t> write_feature_cache(const FeatureCache& cache) {
  if (cache.values.cols() != kFeatureDim) {
    throw InvalidArgument("feature cache must have 2048 columns, got " +
                          std::to_string(cache.values.cols()));
  }
  if (static_cast<Index>(cache.labels.size()) != cache.values.rows()) {
    throw InvalidArgument("feature cache label count does not match rows");
  }
  ByteWriter out;
  out.put_magic(kCacheMagic);
  out.put_u32(kCacheFormatVersion);
  out.put_u64(static_cast<std::uint64_t>(cache.values.rows()));
  out.put_u64(static_cast<std::uint64_t>(cache.values.cols()));
  for (int label : cache.labels) out.put_i32(label);
  out.put_f32s(std::span(cache.values.data(), static_cast<std::size_t>(cache.values.size())));
  return out.release();
}

FeatureCache read_feature_cache(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic(kCacheMagic);
  const std::uint32_t version = in.u32("version");
  if (version != kCacheFormatVersion) {
    throw UnsupportedVersionError("unsupported DFFC version " +
                                  std::to_string(version));
  }
  const std::uint64_t rows = in.u64("n_rows");
  const std::uint64_t cols = in.u64("n_cols");
  if (cols != static_cast<std::uint64_t>(kFeatureDim)) {
    throw FormatInvariantError("feature cache declares " + std::to_string(cols) +
                               " columns; expected 2048");
  }
  const std::uint64_t per_row = 4 + 4 * cols;
  if (rows > in.remaining() / per_row) {
    throw TruncatedError("feature cache declares " + std::to_string(rows) +
                         " rows but the payload holds " +
                         std::to_string(in.remaining() / per_row));
  }
  FeatureCache cache;
  cache.labels.resize(rows);
  for (auto& label : cache.labels) {
    label = in.i32("labels");
    if (label < 0 || label >= kNumSentimentClasses) {
      throw FormatInvariantError("feature cache label " + std::to_string(label) +
                                 " is not a sentiment class");
    }
  }
  cache.values.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  in.f32s(std::span(cache.values.data(), static_cast<std::size_t>(cache.values.size())),
          "feature values");
  if (!in.at_end()) throw FormatInvariantError("trailing bytes after feature values");
  return cache;
}

}  // namespace deepsent::ingest
