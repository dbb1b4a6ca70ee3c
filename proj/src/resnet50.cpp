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

#include "deepsent/resnet50.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "deepsent/binary_io.hpp"

namespace deepsent::resnet {
namespace {

constexpr std::string_view kMagic = "DFWS";
constexpr std::array<const char*, 4> kBnFields = {"gamma", "beta", "mean",
                                                  "var"};

std::string block_prefix(int stage, int block) {
  return "stage" + std::to_string(stage) + ".block" + std::to_string(block);
}

void add_conv_bn(std::vector<ParamSpec>& out, const std::string& conv_name,
                 const std::string& bn_prefix, Shape weight_shape) {
  const Index channels = weight_shape[0];
  out.push_back({conv_name, std::move(weight_shape)});
  for (const char* field : kBnFields) {
    out.push_back({bn_prefix + "." + field, {channels}});
  }
}

std::vector<float> vector_of(const Tensor& t) { return t.values(); }

ConvBn load_conv_bn(const WeightStore& store, const std::string& conv_name,
                    const std::string& bn_prefix, Index stride, Index padding,
                    float epsilon) {
  ConvBn layer;
  layer.weight = store.at(conv_name);
  const Shape& s = layer.weight.shape();
  layer.conv = {s[0], s[1], s[2], s[3], stride, padding, false};
  layer.bn.gamma = vector_of(store.at(bn_prefix + ".gamma"));
  layer.bn.beta = vector_of(store.at(bn_prefix + ".beta"));
  layer.bn.running_mean = vector_of(store.at(bn_prefix + ".mean"));
  layer.bn.running_var = vector_of(store.at(bn_prefix + ".var"));
  layer.bn.epsilon = epsilon;
  return layer;
}

void require_input(const Tensor& batch) {
  const Shape& s = batch.shape();
  if (s.size() != 4 || s[1] != kInputChannels || s[2] != kInputSize ||
      s[3] != kInputSize) {
    throw ShapeError("expected input batch [N,3,224,224], got " +
                     shape_string(s));
  }
}

}  // namespace

const Tensor& WeightStore::at(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw InvalidArgument("no weight named '" + name + "'");
  return it->second;
}

WeightStore load_weights(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic(kMagic);
  const std::uint32_t version = in.u32("version");
  if (version != kWeightFormatVersion) {
    throw UnsupportedVersionError("unsupported DFWS version " +
                                  std::to_string(version));
  }
  const std::uint8_t flag = in.u8("downsample convention");
  if (flag > 1) {
    throw FormatInvariantError("unknown downsample convention flag " +
                               std::to_string(flag));
  }
  WeightStore store;
  store.convention = static_cast<DownsampleConvention>(flag);
  const std::uint32_t count = in.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string index_ctx = "tensor #" + std::to_string(i);
    const std::uint16_t name_len = in.u16(index_ctx + " name length");
    std::string name = in.text(name_len, index_ctx + " name");
    const std::string ctx = "tensor '" + name + "'";
    const std::uint8_t rank = in.u8(ctx + " rank");
    Shape shape(rank);
    std::uint64_t elements = 1;
    for (auto& extent : shape) {
      const std::uint64_t e = in.u64(ctx + " extents");
      if (e != 0 && elements > in.remaining() / 4 / e + 1) {
        throw TruncatedError("truncated input while reading " + ctx +
                             " data: declared extents exceed payload");
      }
      elements *= e;
      extent = static_cast<Index>(e);
    }
    if (elements > in.remaining() / 4) {
      throw TruncatedError("truncated input while reading " + ctx +
                           " data: need " + std::to_string(elements * 4) +
                           " bytes, have " + std::to_string(in.remaining()));
    }
    std::vector<float> data(elements);
    in.f32s(data, ctx + " data");
    if (store.entries.count(name)) {
      throw DuplicateNameError("duplicate tensor name '" + name + "'");
    }
    store.entries.emplace(std::move(name),
                          Tensor(std::move(shape), std::move(data)));
  }
  if (!in.at_end()) {
    throw FormatInvariantError("trailing bytes after last tensor");
  }
  return store;
}

std::vector<std::uint8_t> save_weights(const WeightStore& store) {
  ByteWriter out;
  out.put_magic(kMagic);
  out.put_u32(kWeightFormatVersion);
  out.put_u8(static_cast<std::uint8_t>(store.convention));
  out.put_u32(static_cast<std::uint32_t>(store.entries.size()));
  for (const auto& [name, tensor] : store.entries) {
    if (name.size() > 0xFFFF) throw InvalidArgument("tensor name too long");
    if (tensor.rank() > 0xFF) throw InvalidArgument("tensor rank too large");
    out.put_u16(static_cast<std::uint16_t>(name.size()));
    out.put_magic(name);
    out.put_u8(static_cast<std::uint8_t>(tensor.rank()));
    for (Index e : tensor.shape()) out.put_u64(static_cast<std::uint64_t>(e));
    out.put_f32s(tensor.data());
  }
  return out.release();
}

void NetworkConfig::validate() const {
  if (stage_repeats != std::array<int, 4>{3, 4, 6, 3}) {
    throw InvalidArgument("stage_repeats must be [3,4,6,3]");
  }
  if (feature_dim != 2048) throw InvalidArgument("feature_dim must be 2048");
  if (num_classes < 2) throw InvalidArgument("num_classes must be >= 2");
  if (!(bn_epsilon > 0.0f)) throw InvalidArgument("bn_epsilon must be > 0");
}

void BottleneckSpec::validate() const {
  if (out_channels != 4 * mid_channels) {
    throw InvalidArgument("bottleneck out_channels must be 4 x mid_channels");
  }
  if (has_projection != (stride != 1 || in_channels != out_channels)) {
    throw InvalidArgument(
        "bottleneck needs a projection exactly when stride != 1 or widths "
        "differ");
  }
}

std::vector<BottleneckSpec> stage_blocks(int stage, int repeats) {
  const Index mid = Index{64} << (stage - 1);
  const Index out = 4 * mid;
  const Index first_in = stage == 1 ? 64 : 2 * mid;  // previous stage width
  std::vector<BottleneckSpec> blocks;
  for (int b = 0; b < repeats; ++b) {
    BottleneckSpec spec;
    spec.in_channels = b == 0 ? first_in : out;
    spec.mid_channels = mid;
    spec.out_channels = out;
    spec.stride = (b == 0 && stage > 1) ? 2 : 1;
    spec.has_projection =
        spec.stride != 1 || spec.in_channels != spec.out_channels;
    blocks.push_back(spec);
  }
  return blocks;
}

std::vector<ParamSpec> architecture_manifest(const NetworkConfig& config) {
  std::vector<ParamSpec> out;
  add_conv_bn(out, "stem.conv.weight", "stem.bn", {64, 3, 7, 7});
  for (int s = 1; s <= 4; ++s) {
    const auto blocks = stage_blocks(s, config.stage_repeats[s - 1]);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& spec = blocks[b];
      const std::string p = block_prefix(s, static_cast<int>(b) + 1);
      add_conv_bn(out, p + ".conv1.weight", p + ".bn1",
                  {spec.mid_channels, spec.in_channels, 1, 1});
      add_conv_bn(out, p + ".conv2.weight", p + ".bn2",
                  {spec.mid_channels, spec.mid_channels, 3, 3});
      add_conv_bn(out, p + ".conv3.weight", p + ".bn3",
                  {spec.out_channels, spec.mid_channels, 1, 1});
      if (spec.has_projection) {
        add_conv_bn(out, p + ".proj.conv.weight", p + ".proj.bn",
                    {spec.out_channels, spec.in_channels, 1, 1});
      }
    }
  }
  out.push_back({"head.fc.weight", {config.feature_dim, config.num_classes}});
  out.push_back({"head.fc.bias", {config.num_classes}});
  return out;
}

bool ValidationReport::ok() const {
  return missing.empty() && unexpected.empty() && shape_mismatches.empty() &&
         stage_conv_layers == expected_stage_conv_layers;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "missing=" << missing.size() << " unexpected=" << unexpected.size()
     << " shape_mismatches=" << shape_mismatches.size() << " stage_convs=(";
  for (int i = 0; i < 4; ++i) os << (i ? "," : "") << stage_conv_layers[i];
  os << ") expected=(";
  for (int i = 0; i < 4; ++i) {
    os << (i ? "," : "") << expected_stage_conv_layers[i];
  }
  os << ")";
  for (const auto& name : missing) os << "\n  missing: " << name;
  for (const auto& name : unexpected) os << "\n  unexpected: " << name;
  for (const auto& m : shape_mismatches) {
    os << "\n  shape: " << m.name << " expected " << shape_string(m.expected)
       << " got " << shape_string(m.actual);
  }
  return os.str();
}

ArchitectureError::ArchitectureError(ValidationReport report)
    : Error("weight store does not match the architecture: " +
            report.summary()),
      report_(std::move(report)) {}

ValidationReport validate_architecture(const WeightStore& store,
                                       const NetworkConfig& config,
                                       bool strict) {
  ValidationReport report;
  std::map<std::string, Shape> expected;
  for (auto& p : architecture_manifest(config)) {
    expected.emplace(std::move(p.name), std::move(p.shape));
  }
  for (const auto& [name, shape] : expected) {
    auto it = store.entries.find(name);
    if (it == store.entries.end()) {
      report.missing.push_back(name);
    } else if (it->second.shape() != shape) {
      report.shape_mismatches.push_back({name, shape, it->second.shape()});
    }
  }
  for (const auto& [name, tensor] : store.entries) {
    if (!expected.count(name)) report.unexpected.push_back(name);
  }
  for (int s = 1; s <= 4; ++s) {
    report.expected_stage_conv_layers[s - 1] = 3 * config.stage_repeats[s - 1];
    const std::string stage_prefix = "stage" + std::to_string(s) + ".block";
    for (const auto& [name, tensor] : store.entries) {
      if (name.rfind(stage_prefix, 0) != 0) continue;
      for (const char* conv : {".conv1.weight", ".conv2.weight", ".conv3.weight"}) {
        const std::string_view suffix(conv);
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) ==
                0 &&
            name.find(".proj.") == std::string::npos) {
          ++report.stage_conv_layers[s - 1];
        }
      }
    }
  }
  if (strict && !report.ok()) throw ArchitectureError(report);
  return report;
}

Tensor conv_bn(const ConvBn& layer, const Tensor& input) {
  return batchnorm_infer(conv2d<float>(input, layer.weight, {}, layer.conv),
                         layer.bn);
}

Tensor bottleneck_forward(const Bottleneck& block, const Tensor& input) {
  Tensor x = relu(conv_bn(block.reduce, input));
  x = relu(conv_bn(block.spatial, x));
  x = conv_bn(block.expand, x);
  if (block.projection) {
    const Tensor shortcut = conv_bn(*block.projection, input);
    x.matrix(1, x.size()) += shortcut.matrix(1, shortcut.size());
  } else {
    if (x.shape() != input.shape()) {
      throw ShapeError("identity shortcut shape " + shape_string(input.shape()) +
                       " differs from residual " + shape_string(x.shape()));
    }
    x.matrix(1, x.size()) += input.matrix(1, input.size());
  }
  return relu(std::move(x));
}

Model build_model(const WeightStore& store, const NetworkConfig& config) {
  config.validate();
  validate_architecture(store, config, /*strict=*/true);

  Model model;
  model.config_ = config;
  const float eps = config.bn_epsilon;
  model.stem_ = load_conv_bn(store, "stem.conv.weight", "stem.bn", 2, 3, eps);
  const bool stride_in_reduce =
      store.convention == DownsampleConvention::kStrideInReduceConv;
  for (int s = 1; s <= 4; ++s) {
    std::vector<Bottleneck> stage;
    const auto specs = stage_blocks(s, config.stage_repeats[s - 1]);
    for (std::size_t b = 0; b < specs.size(); ++b) {
      const auto& spec = specs[b];
      spec.validate();
      const std::string p = block_prefix(s, static_cast<int>(b) + 1);
      Bottleneck block;
      block.spec = spec;
      block.reduce = load_conv_bn(store, p + ".conv1.weight", p + ".bn1",
                                  stride_in_reduce ? spec.stride : 1, 0, eps);
      block.spatial = load_conv_bn(store, p + ".conv2.weight", p + ".bn2",
                                   stride_in_reduce ? 1 : spec.stride, 1, eps);
      block.expand =
          load_conv_bn(store, p + ".conv3.weight", p + ".bn3", 1, 0, eps);
      if (spec.has_projection) {
        block.projection = load_conv_bn(store, p + ".proj.conv.weight",
                                        p + ".proj.bn", spec.stride, 0, eps);
      }
      stage.push_back(std::move(block));
    }
    model.stages_.push_back(std::move(stage));
  }
  model.head_weight_ = store.at("head.fc.weight");
  model.head_bias_ = store.at("head.fc.bias").values();
  return model;
}

Tensor Model::extract_features(const Tensor& batch) const {
  require_input(batch);
  Tensor x = maxpool2d(relu(conv_bn(stem_, batch)), 3, 2, 1);
  for (const auto& stage : stages_) {
    for (const auto& block : stage) x = bottleneck_forward(block, x);
  }
  return global_avg_pool(x);
}

Tensor Model::head_logits(const Tensor& features) const {
  return dense<float>(features, head_weight_, head_bias_);
}

Tensor Model::predict_logits(const Tensor& batch) const {
  return head_logits(extract_features(batch));
}

Tensor Model::predict_proba(const Tensor& batch) const {
  return softmax(predict_logits(batch));
}

WeightStore random_weight_store(const NetworkConfig& config,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  WeightStore store;
  for (const auto& param : architecture_manifest(config)) {
    Tensor t(param.shape);
    const std::string& name = param.name;
    auto ends_with = [&](std::string_view suffix) {
      return name.size() >= suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(),
                          suffix) == 0;
    };
    if (ends_with(".weight") && t.rank() >= 2) {
      const Index fan_in =
          t.rank() == 4 ? param.shape[1] * param.shape[2] * param.shape[3]
                        : param.shape[0];
      std::normal_distribution<float> normal(
          0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
      for (float& v : t.data()) v = normal(rng);
    } else if (ends_with(".gamma")) {
      // Damp the last convolution of each block so residual sums stay bounded.
      const bool damp = ends_with("bn3.gamma");
      for (float& v : t.data()) v = damp ? 0.1f + 0.2f * unit(rng) : 0.8f + 0.4f * unit(rng);
    } else if (ends_with(".beta") || ends_with(".mean")) {
      for (float& v : t.data()) v = 0.2f * unit(rng) - 0.1f;
    } else if (ends_with(".var")) {
      for (float& v : t.data()) v = 0.5f + unit(rng);
    }
    // head.fc.bias stays zero.
    store.entries.emplace(name, std::move(t));
  }
  return store;
}

}  // namespace deepsent::resnet
