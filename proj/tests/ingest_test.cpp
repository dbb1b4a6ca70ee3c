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
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "gtest/gtest.h"

#include "deepsent/binary_io.hpp"
#include "deepsent/errors.hpp"
#include "deepsent/ingest.hpp"

namespace deepsent::ingest {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ImageBuffer random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  ImageBuffer img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

std::string manifest_text(const std::string& prefix, std::array<int, 3> counts) {
  std::string text = "path,label\n";
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < counts[c]; ++i)
      text += prefix + std::to_string(c) + "_" + std::to_string(i) + ".ppm," +
              std::string(kSentimentNames[c]) + "\n";
  return text;
}

TEST(Manifest, SmallestValid) {
  const auto entries = parse_manifest("path,label\na.ppm,positive");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].path, "a.ppm");
  EXPECT_EQ(entries[0].label, SentimentLabel::kPositive);
}

TEST(Manifest, CaseBlankLinesAndCommas) {
  const auto entries =
      parse_manifest("path,label\r\n\r\nx/a,b.ppm,POSITIVE\r\n  \nb.ppm, Neutral \nc.ppm,negative\n");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].path, "x/a,b.ppm");
  EXPECT_EQ(entries[0].label, SentimentLabel::kPositive);
  EXPECT_EQ(entries[1].label, SentimentLabel::kNeutral);
  EXPECT_EQ(entries[2].label, SentimentLabel::kNegative);
}

TEST(Manifest, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    try {
      parse_manifest(text);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("path,label\na.ppm,happy").find("line 2"), std::string::npos);
  EXPECT_NE(message("path,label\na.ppm,neutral\nb.ppm").find("line 3"), std::string::npos);
  EXPECT_NE(message("path,label\n,neutral").find("line 2"), std::string::npos);
  EXPECT_NE(message("file,label\na.ppm,neutral").find("line 1"), std::string::npos);
  EXPECT_NE(message("").find("line 1"), std::string::npos);
}

TEST(Manifest, ResolvesAgainstManifestDirectory) {
  const ManifestEntry rel{"img/a.ppm", SentimentLabel::kNeutral};
  EXPECT_EQ(resolve_entry_path("/data/set/manifest.csv", rel), std::filesystem::path("/data/set/img/a.ppm"));
  const ManifestEntry abs{"/abs/b.ppm", SentimentLabel::kNeutral};
  EXPECT_EQ(resolve_entry_path("/data/set/manifest.csv", abs), std::filesystem::path("/abs/b.ppm"));
}

TEST(Stats, DatasetCounts) {
  const auto gaped = parse_manifest(manifest_text("g", {520, 90, 122}));
  const DatasetStats g = dataset_stats(gaped);
  EXPECT_EQ(g.counts, (std::array<std::int64_t, 3>{520, 90, 122}));
  EXPECT_EQ(g.total, 732);

  const auto crowd = parse_manifest(manifest_text("c", {1912, 2023, 7780}));
  const DatasetStats c = dataset_stats(crowd);
  EXPECT_EQ(c.counts, (std::array<std::int64_t, 3>{1912, 2023, 7780}));
  EXPECT_EQ(c.total, 11715);

  auto combined = gaped;
  combined.insert(combined.end(), crowd.begin(), crowd.end());
  const DatasetStats all = dataset_stats(combined);
  EXPECT_EQ(all.counts, (std::array<std::int64_t, 3>{2432, 2113, 7902}));
  EXPECT_EQ(all.total, 12447);
  EXPECT_EQ(all.total, static_cast<std::int64_t>(combined.size()));

  const DatasetStats none = dataset_stats({});
  EXPECT_EQ(none.total, 0);
  EXPECT_EQ(none.counts, (std::array<std::int64_t, 3>{0, 0, 0}));
}

TEST(Ppm, DecodesSinglePixelAndComments) {
  std::string one = "P6\n1 1\n255\n";
  one += std::string("\xff\x00\x00", 3);
  const ImageBuffer img = decode_ppm(bytes_of(one));
  EXPECT_EQ(img.width, 1);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{255, 0, 0}));

  std::string commented = "P6 # magic\n# a comment line\n2 # width\n1\n#x\n255\n";
  commented += std::string("\x01\x02\x03\x04\x05\x06", 6);
  const ImageBuffer two = decode_ppm(bytes_of(commented));
  EXPECT_EQ(two.width, 2);
  EXPECT_EQ(two.pixels, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6}));
}

TEST(Ppm, DistinctErrors) {
  EXPECT_THROW(decode_ppm(bytes_of("P3\n1 1\n255\n1 2 3")), BadMagicError);
  EXPECT_THROW(decode_ppm(bytes_of(std::string("P6\n1 1\n65535\n") + std::string(6, '\0'))),
               FormatInvariantError);
  EXPECT_THROW(decode_ppm(bytes_of(std::string("P6\n2 2\n255\n") + std::string(11, '\0'))),
               TruncatedError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n0 1\n255\n")), FormatInvariantError);
}

TEST(Ppm, EncodeRoundTrip) {
  std::mt19937_64 rng(2);
  const ImageBuffer img = random_image(17, 9, rng);
  EXPECT_EQ(decode_ppm(encode_ppm(img)), img);
}

TEST(Resize, IdentityAtEqualSize) {
  std::mt19937_64 rng(3);
  const ImageBuffer img = random_image(224, 224, rng);
  EXPECT_EQ(resize_bilinear(img), img);
  const ImageBuffer small = random_image(5, 3, rng);
  EXPECT_EQ(resize_bilinear(small, 5, 3), small);
}

TEST(Resize, TwoByTwoAverage) {
  ImageBuffer img{2, 2, {10, 0, 0, 20, 0, 0, 30, 0, 0, 40, 0, 0}};
  const ImageBuffer out = resize_bilinear(img, 1, 1);
  EXPECT_EQ(out.at(0, 0, 0), 25);
  EXPECT_EQ(out.at(0, 0, 1), 0);
}

TEST(Resize, ConstantsAndRangePreserved) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> size(1, 400), value(0, 255);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = size(rng), h = size(rng);
    ImageBuffer flat{w, h, {}};
    const std::uint8_t rgb[3] = {std::uint8_t(value(rng)), std::uint8_t(value(rng)), std::uint8_t(value(rng))};
    for (int i = 0; i < w * h; ++i) flat.pixels.insert(flat.pixels.end(), rgb, rgb + 3);
    const ImageBuffer out = resize_bilinear(flat);
    ASSERT_EQ(out.pixels.size(), 224u * 224u * 3u);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) EXPECT_EQ(out.pixels[i], rgb[i % 3]);

    ImageBuffer img = random_image(w, h, rng);
    std::array<int, 3> lo{255, 255, 255}, hi{0, 0, 0};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      lo[i % 3] = std::min<int>(lo[i % 3], img.pixels[i]);
      hi[i % 3] = std::max<int>(hi[i % 3], img.pixels[i]);
    }
    const ImageBuffer r = resize_bilinear(img);
    for (std::size_t i = 0; i < r.pixels.size(); ++i) {
      EXPECT_GE(r.pixels[i], lo[i % 3]);
      EXPECT_LE(r.pixels[i], hi[i % 3]);
    }
  }
}

TEST(Normalize, ExamplesAndInverse) {
  PreprocessConfig unit;
  unit.channel_mean = {0, 0, 0};
  unit.channel_std = {1, 1, 1};
  ImageBuffer white{224, 224, std::vector<std::uint8_t>(224 * 224 * 3, 255)};
  const Tensor t = normalize(white, unit);
  ASSERT_EQ(t.shape(), (Shape{3, 224, 224}));
  for (float v : t.data()) EXPECT_EQ(v, 1.0f);

  PreprocessConfig centred;
  centred.channel_mean = {51.0f / 255.0f, 128.0f / 255.0f, 204.0f / 255.0f};
  centred.channel_std = {0.5f, 0.25f, 2.0f};
  ImageBuffer img{224, 224, {}};
  for (int i = 0; i < 224 * 224; ++i) img.pixels.insert(img.pixels.end(), {51, 128, 204});
  const Tensor z = normalize(img, centred);
  for (float v : z.data()) EXPECT_EQ(v, 0.0f);

  std::mt19937_64 rng(6);
  const ImageBuffer random = random_image(224, 224, rng);
  const PreprocessConfig standard;
  const Tensor n = normalize(random, standard);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 224; y += 7)
      for (int x = 0; x < 224; x += 5) {
        const double back = double(n[(c * 224 + y) * 224 + x]) * standard.channel_std[c] + standard.channel_mean[c];
        EXPECT_NEAR(back, random.at(x, y, c) / 255.0, 1e-6);
      }
}

TEST(Normalize, Errors) {
  EXPECT_THROW(normalize(ImageBuffer{10, 10, std::vector<std::uint8_t>(300)}, {}), ShapeError);
  PreprocessConfig bad;
  bad.channel_std = {0.2f, 0.0f, 0.2f};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  PreprocessConfig wrong_size;
  wrong_size.target_width = 256;
  EXPECT_THROW(wrong_size.validate(), InvalidArgument);
}

TEST(Preprocess, DeterministicPipeline) {
  std::mt19937_64 rng(7);
  const auto ppm = encode_ppm(random_image(300, 180, rng));
  const Tensor a = preprocess_ppm(ppm, {});
  const Tensor b = preprocess_ppm(ppm, {});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), (Shape{3, 224, 224}));
}

TEST(FeatureCacheFormat, RoundTrip) {
  std::mt19937_64 rng(8);
  std::normal_distribution<float> n;
  FeatureCache cache;
  cache.values.resize(5, kFeatureDim);
  for (Index i = 0; i < cache.values.size(); ++i) cache.values.data()[i] = n(rng);
  cache.values(2, 7) = -0.0f;
  cache.values(3, 9) = std::numeric_limits<float>::denorm_min();
  cache.labels = {0, 2, 1, 1, 0};
  const auto bytes = write_feature_cache(cache);
  EXPECT_EQ(bytes.size(), 4u + 4 + 8 + 8 + 5 * 4 + 5 * 2048 * 4);
  const FeatureCache back = read_feature_cache(bytes);
  EXPECT_EQ(back.labels, cache.labels);
  ASSERT_EQ(back.values.rows(), 5);
  EXPECT_EQ(std::memcmp(back.values.data(), cache.values.data(), 5 * 2048 * sizeof(float)), 0);
  EXPECT_EQ(write_feature_cache(back), bytes);
}

TEST(FeatureCacheFormat, Errors) {
  FeatureCache cache;
  cache.values = RowMatrixXf::Zero(2, kFeatureDim);
  cache.labels = {0, 1};
  const auto bytes = write_feature_cache(cache);

  ByteWriter longer;
  longer.put_magic("DFFC");
  longer.put_u32(1);
  longer.put_u64(3);
  longer.put_u64(2048);
  auto tail = std::vector<std::uint8_t>(bytes.begin() + 24, bytes.end());
  longer.put_bytes(tail);
  EXPECT_THROW(read_feature_cache(longer.bytes()), TruncatedError);

  ByteWriter narrow;
  narrow.put_magic("DFFC");
  narrow.put_u32(1);
  narrow.put_u64(1);
  narrow.put_u64(1024);
  narrow.put_i32(0);
  for (int i = 0; i < 1024; ++i) narrow.put_f32(0.0f);
  EXPECT_THROW(read_feature_cache(narrow.bytes()), FormatInvariantError);

  auto magic = bytes;
  magic[3] = 'X';
  EXPECT_THROW(read_feature_cache(magic), BadMagicError);
  auto version = bytes;
  version[4] = 7;
  EXPECT_THROW(read_feature_cache(version), UnsupportedVersionError);
  auto label = bytes;
  label[24] = 9;
  EXPECT_THROW(read_feature_cache(label), FormatInvariantError);

  FeatureCache mismatched = cache;
  mismatched.labels.push_back(2);
  EXPECT_THROW(write_feature_cache(mismatched), InvalidArgument);
}

}  // namespace
}  // namespace deepsent::ingest
