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

#ifndef DEEPSENT_LAYERS_HPP_
#define DEEPSENT_LAYERS_HPP_

// Inference-mode neural network primitives over TensorT. All functions are
// pure; each image in a batch is processed independently, so row i of any
// output depends only on row i of the input.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deepsent/errors.hpp"
#include "deepsent/tensor.hpp"

namespace deepsent {

struct Conv2dSpec {
  Index out_channels = 0;
  Index in_channels = 0;
  Index kernel_h = 1;
  Index kernel_w = 1;
  Index stride = 1;
  Index padding = 0;
  bool has_bias = false;

  Shape weight_shape() const {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
};

template <typename Scalar>
struct BatchNormParamsT {
  std::vector<Scalar> gamma;
  std::vector<Scalar> beta;
  std::vector<Scalar> running_mean;
  std::vector<Scalar> running_var;
  Scalar epsilon = Scalar(1e-5);

  static BatchNormParamsT identity(Index channels, Scalar eps = Scalar(1e-5)) {
    const auto n = static_cast<std::size_t>(channels);
    return {std::vector<Scalar>(n, Scalar(1)), std::vector<Scalar>(n, Scalar(0)),
            std::vector<Scalar>(n, Scalar(0)), std::vector<Scalar>(n, Scalar(1)),
            eps};
  }
};
using BatchNormParams = BatchNormParamsT<float>;

// Zero epsilon is only meaningful for exact-identity checks; production
// callers keep the strict default.
enum class EpsilonPolicy { kStrictlyPositive, kAllowZero };

// floor((in + 2*padding - kernel) / stride) + 1, rejecting empty outputs.
inline Index pooled_extent(Index in, Index kernel, Index stride, Index padding) {
  if (kernel < 1) throw InvalidArgument("kernel extent must be >= 1");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (padding < 0) throw InvalidArgument("padding must be >= 0");
  const Index span = in + 2 * padding - kernel;
  if (span < 0) {
    throw ShapeError("window " + std::to_string(kernel) + " with padding " +
                     std::to_string(padding) + " exceeds input extent " +
                     std::to_string(in));
  }
  return span / stride + 1;
}

namespace internal {

inline void require_rank(const Shape& shape, std::size_t rank,
                         const char* op, const char* what) {
  if (shape.size() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " +
                     std::to_string(rank) + ", got " + shape_string(shape));
  }
}

// Unfolds one C x H x W image into a (C*kh*kw) x (Ho*Wo) patch matrix.
template <typename Scalar>
void im2col(const Scalar* image, Index channels, Index height, Index width,
            const Conv2dSpec& spec, Index out_h, Index out_w,
            RowMatrix<Scalar>& cols) {
  cols.resize(channels * spec.kernel_h * spec.kernel_w, out_h * out_w);
  Index row = 0;
  for (Index c = 0; c < channels; ++c) {
    const Scalar* plane = image + c * height * width;
    for (Index ky = 0; ky < spec.kernel_h; ++ky) {
      for (Index kx = 0; kx < spec.kernel_w; ++kx, ++row) {
        Scalar* dst = cols.row(row).data();
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * spec.stride - spec.padding + ky;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, Scalar(0));
            dst += out_w;
            continue;
          }
          const Scalar* src_row = plane + iy * width;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * spec.stride - spec.padding + kx;
            *dst++ = (ix >= 0 && ix < width) ? src_row[ix] : Scalar(0);
          }
        }
      }
    }
  }
}

}  // namespace internal

/// 2-D cross-correlation with zero padding and one stride for both axes.
/// `bias` must be empty unless spec.has_bias, in which case it holds
/// out_channels values.
template <typename Scalar>
TensorT<Scalar> conv2d(const TensorT<Scalar>& input,
                       const TensorT<Scalar>& weight,
                       std::span<const Scalar> bias, const Conv2dSpec& spec) {
  internal::require_rank(input.shape(), 4, "conv2d", "input");
  internal::require_rank(weight.shape(), 4, "conv2d", "weight");
  if (weight.shape() != spec.weight_shape()) {
    throw ShapeError("conv2d: weight shape " + shape_string(weight.shape()) +
                     " disagrees with spec " +
                     shape_string(spec.weight_shape()));
  }
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2),
              w = input.dim(3);
  if (c != spec.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(c) +
                     " channels, weight expects " +
                     std::to_string(spec.in_channels));
  }
  if (spec.has_bias != !bias.empty() ||
      (spec.has_bias && static_cast<Index>(bias.size()) != spec.out_channels)) {
    throw ShapeError("conv2d: bias length " + std::to_string(bias.size()) +
                     " inconsistent with " + std::to_string(spec.out_channels) +
                     " output channels (has_bias=" +
                     (spec.has_bias ? "true" : "false") + ")");
  }
  const Index out_h = pooled_extent(h, spec.kernel_h, spec.stride, spec.padding);
  const Index out_w = pooled_extent(w, spec.kernel_w, spec.stride, spec.padding);
  const Index k = spec.out_channels;
  const Index patch = c * spec.kernel_h * spec.kernel_w;

  TensorT<Scalar> out({n, k, out_h, out_w});
  const auto kernel = weight.matrix(k, patch);
  const bool pointwise = spec.kernel_h == 1 && spec.kernel_w == 1 &&
                         spec.stride == 1 && spec.padding == 0;
  RowMatrix<Scalar> cols;
  for (Index b = 0; b < n; ++b) {
    const Scalar* image = input.data().data() + b * c * h * w;
    Eigen::Map<RowMatrix<Scalar>> dst(out.data().data() + b * k * out_h * out_w,
                                      k, out_h * out_w);
    if (pointwise) {
      Eigen::Map<const RowMatrix<Scalar>> src(image, c, h * w);
      dst.noalias() = kernel * src;
    } else {
      internal::im2col(image, c, h, w, spec, out_h, out_w, cols);
      dst.noalias() = kernel * cols;
    }
    if (spec.has_bias) {
      for (Index o = 0; o < k; ++o) dst.row(o).array() += bias[o];
    }
  }
  return out;
}

template <typename Scalar>
TensorT<Scalar> batchnorm_infer(
    const TensorT<Scalar>& input, const BatchNormParamsT<Scalar>& params,
    EpsilonPolicy policy = EpsilonPolicy::kStrictlyPositive) {
  internal::require_rank(input.shape(), 4, "batchnorm_infer", "input");
  const Index n = input.dim(0), c = input.dim(1),
              plane = input.dim(2) * input.dim(3);
  const auto cs = static_cast<std::size_t>(c);
  if (params.gamma.size() != cs || params.beta.size() != cs ||
      params.running_mean.size() != cs || params.running_var.size() != cs) {
    throw ShapeError("batchnorm_infer: parameter vectors must have length " +
                     std::to_string(c));
  }
  if (params.epsilon < Scalar(0) ||
      (params.epsilon == Scalar(0) &&
       policy == EpsilonPolicy::kStrictlyPositive)) {
    throw InvalidArgument("batchnorm_infer: epsilon must be > 0");
  }
  std::vector<Scalar> scale(cs);
  for (std::size_t i = 0; i < cs; ++i) {
    const Scalar denom = params.running_var[i] + params.epsilon;
    if (!(params.running_var[i] >= Scalar(0)) || !(denom > Scalar(0))) {
      throw InvalidArgument("batchnorm_infer: running_var[" +
                            std::to_string(i) + "] + epsilon must be > 0");
    }
    scale[i] = params.gamma[i] / std::sqrt(denom);
  }
  TensorT<Scalar> out(input.shape());
  const Scalar* src = input.data().data();
  Scalar* dst = out.data().data();
  for (Index b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < cs; ++ch) {
      const Scalar mean = params.running_mean[ch];
      const Scalar beta = params.beta[ch];
      const Scalar s = scale[ch];
      for (Index p = 0; p < plane; ++p) *dst++ = (*src++ - mean) * s + beta;
    }
  }
  return out;
}

template <typename Scalar>
TensorT<Scalar> relu(TensorT<Scalar> input) {
  for (Scalar& v : input.data()) v = std::max(v, Scalar(0));
  return input;
}

// Padded cells act as -infinity, so they never win a window.
template <typename Scalar>
TensorT<Scalar> maxpool2d(const TensorT<Scalar>& input, Index kernel,
                          Index stride, Index padding) {
  internal::require_rank(input.shape(), 4, "maxpool2d", "input");
  const Index n = input.dim(0), c = input.dim(1), h = input.dim(2),
              w = input.dim(3);
  const Index out_h = pooled_extent(h, kernel, stride, padding);
  const Index out_w = pooled_extent(w, kernel, stride, padding);
  TensorT<Scalar> out({n, c, out_h, out_w});
  Scalar* dst = out.data().data();
  for (Index plane = 0; plane < n * c; ++plane) {
    const Scalar* src = input.data().data() + plane * h * w;
    for (Index oy = 0; oy < out_h; ++oy) {
      const Index y0 = std::max<Index>(oy * stride - padding, 0);
      const Index y1 = std::min<Index>(oy * stride - padding + kernel, h);
      for (Index ox = 0; ox < out_w; ++ox) {
        const Index x0 = std::max<Index>(ox * stride - padding, 0);
        const Index x1 = std::min<Index>(ox * stride - padding + kernel, w);
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (Index y = y0; y < y1; ++y) {
          for (Index x = x0; x < x1; ++x) best = std::max(best, src[y * w + x]);
        }
        *dst++ = best;
      }
    }
  }
  return out;
}

// N x C x H x W -> N x C spatial mean, accumulated in double.
template <typename Scalar>
TensorT<Scalar> global_avg_pool(const TensorT<Scalar>& input) {
  internal::require_rank(input.shape(), 4, "global_avg_pool", "input");
  const Index n = input.dim(0), c = input.dim(1),
              plane = input.dim(2) * input.dim(3);
  if (plane < 1) throw ShapeError("global_avg_pool: empty spatial extent");
  TensorT<Scalar> out({n, c});
  const Scalar* src = input.data().data();
  for (Index i = 0; i < n * c; ++i, src += plane) {
    double sum = 0.0;
    for (Index p = 0; p < plane; ++p) sum += static_cast<double>(src[p]);
    out[i] = static_cast<Scalar>(sum / static_cast<double>(plane));
  }
  return out;
}

// [N, D] x [D, M] + bias[M].
template <typename Scalar>
TensorT<Scalar> dense(const TensorT<Scalar>& input,
                      const TensorT<Scalar>& weight,
                      std::span<const Scalar> bias) {
  internal::require_rank(input.shape(), 2, "dense", "input");
  internal::require_rank(weight.shape(), 2, "dense", "weight");
  const Index n = input.dim(0), d = input.dim(1), m = weight.dim(1);
  if (weight.dim(0) != d) {
    throw ShapeError("dense: input width " + std::to_string(d) +
                     " does not match weight rows " +
                     std::to_string(weight.dim(0)));
  }
  if (static_cast<Index>(bias.size()) != m) {
    throw ShapeError("dense: bias length " + std::to_string(bias.size()) +
                     " does not match weight columns " + std::to_string(m));
  }
  TensorT<Scalar> out({n, m});
  auto result = out.matrix(n, m);
  result.noalias() = input.matrix(n, d) * weight.matrix(d, m);
  const Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> b(
      bias.data(), m);
  result.rowwise() += b;
  return out;
}

// Row-wise softmax over [N, M] with max subtraction.
template <typename Scalar>
TensorT<Scalar> softmax(const TensorT<Scalar>& input) {
  internal::require_rank(input.shape(), 2, "softmax", "input");
  const Index n = input.dim(0), m = input.dim(1);
  TensorT<Scalar> out(input.shape());
  std::vector<double> e(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) top = std::max(top, double(input(i, j)));
    double sum = 0.0;
    for (Index j = 0; j < m; ++j) {
      e[j] = std::exp(double(input(i, j)) - top);
      sum += e[j];
    }
    for (Index j = 0; j < m; ++j) out(i, j) = static_cast<Scalar>(e[j] / sum);
  }
  return out;
}

}  // namespace deepsent

#endif  // DEEPSENT_LAYERS_HPP_
