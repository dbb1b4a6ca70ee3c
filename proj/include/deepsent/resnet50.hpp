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

#ifndef DEEPSENT_RESNET50_HPP_
#define DEEPSENT_RESNET50_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepsent/errors.hpp"
#include "deepsent/layers.hpp"
#include "deepsent/tensor.hpp"

namespace deepsent::resnet {

// Which convolution of a downsampling bottleneck carries stride 2.
enum class DownsampleConvention : std::uint8_t {
  kStrideInSpatialConv = 0,  // the 3x3 (middle) convolution
  kStrideInReduceConv = 1,   // the leading 1x1 convolution
};

// Named parameter tensors as stored in a DFWS container.
struct WeightStore {
  DownsampleConvention convention = DownsampleConvention::kStrideInSpatialConv;
  std::map<std::string, Tensor> entries;

  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const {
    return entries.count(name) != 0;
  }
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;

// DFWS container. Layout: "DFWS", u32 version, u8 convention, u32 count,
// then per tensor u16 name length, name, u8 rank, rank x u64 extents and
// the float32 payload, all little-endian with no padding.
WeightStore load_weights(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_weights(const WeightStore& store);

struct NetworkConfig {
  std::array<int, 4> stage_repeats = {3, 4, 6, 3};
  int num_classes = 3;
  int feature_dim = 2048;
  float bn_epsilon = 1e-5f;

  // Throws InvalidArgument unless repeats are {3,4,6,3}, feature_dim is
  // 2048 and num_classes >= 2.
  void validate() const;
};

struct BottleneckSpec {
  Index in_channels = 0;
  Index mid_channels = 0;
  Index out_channels = 0;
  Index stride = 1;
  bool has_projection = false;

  void validate() const;
};

// Block layout of one stage; stage is 1-based (1 = conv2_x ... 4 = conv5_x).
std::vector<BottleneckSpec> stage_blocks(int stage, int repeats);

struct ParamSpec {
  std::string name;
  Shape shape;
};

// Every parameter the network needs, in forward order.
std::vector<ParamSpec> architecture_manifest(const NetworkConfig& config);

struct ShapeMismatch {
  std::string name;
  Shape expected;
  Shape actual;
};

struct ValidationReport {
  std::vector<std::string> missing;
  std::vector<std::string> unexpected;
  std::vector<ShapeMismatch> shape_mismatches;
  // Main-path convolutions (conv1..conv3 of each bottleneck) found in the
  // store per stage, and the count the configuration requires.
  std::array<int, 4> stage_conv_layers = {0, 0, 0, 0};
  std::array<int, 4> expected_stage_conv_layers = {0, 0, 0, 0};

  bool ok() const;
  std::string summary() const;
};

class ArchitectureError : public Error {
 public:
  explicit ArchitectureError(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Compares `store` against architecture_manifest(config). With strict set,
// any finding raises ArchitectureError carrying the report.
ValidationReport validate_architecture(const WeightStore& store,
                                       const NetworkConfig& config,
                                       bool strict = false);

struct ConvBn {
  Tensor weight;
  Conv2dSpec conv;
  BatchNormParams bn;
};

struct Bottleneck {
  BottleneckSpec spec;
  ConvBn reduce;   // 1x1
  ConvBn spatial;  // 3x3
  ConvBn expand;   // 1x1, 4x widening
  std::optional<ConvBn> projection;
};

Tensor conv_bn(const ConvBn& layer, const Tensor& input);
// relu(expand(spatial(reduce(x))) + shortcut(x)).
Tensor bottleneck_forward(const Bottleneck& block, const Tensor& input);

inline constexpr Index kInputChannels = 3;
inline constexpr Index kInputSize = 224;

// Immutable inference graph: stem, four bottleneck stages, global average
// pool and a dense classification head.
class Model {
 public:
  const NetworkConfig& config() const { return config_; }
  const std::vector<std::vector<Bottleneck>>& stages() const { return stages_; }

  // [N,3,224,224] -> [N,2048] activations of the global average pool.
  Tensor extract_features(const Tensor& batch) const;
  // [N,2048] -> [N,num_classes] head logits.
  Tensor head_logits(const Tensor& features) const;
  Tensor predict_logits(const Tensor& batch) const;
  Tensor predict_proba(const Tensor& batch) const;

 private:
  friend Model build_model(const WeightStore&, const NetworkConfig&);
  Model() = default;

  NetworkConfig config_;
  ConvBn stem_;
  std::vector<std::vector<Bottleneck>> stages_;
  Tensor head_weight_;
  std::vector<float> head_bias_;
};

Model build_model(const WeightStore& store, const NetworkConfig& config);

// Random He-scaled weights with mild batch-norm statistics; activations stay
// O(1) through all sixteen blocks. For demos and tests, not for inference.
WeightStore random_weight_store(const NetworkConfig& config,
                                std::uint64_t seed);

}  // namespace deepsent::resnet

#endif  // DEEPSENT_RESNET50_HPP_
