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

#ifndef DEEPSENT_TENSOR_HPP_
#define DEEPSENT_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "deepsent/errors.hpp"

namespace deepsent {

using Index = std::int64_t;
using Shape = std::vector<Index>;

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXf = RowMatrix<float>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major N-dimensional array. Images use batch x channel x height x
// width. The flat buffer always holds exactly shape_size(shape) elements.
template <typename Scalar>
class TensorT {
 public:
  using value_type = Scalar;
  using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

  TensorT() = default;

  explicit TensorT(Shape shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)) {
    check_extents();
    data_.assign(static_cast<std::size_t>(shape_size(shape_)), fill);
  }

  TensorT(Shape shape, std::vector<Scalar> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (static_cast<Index>(data_.size()) != shape_size(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  Index dim(std::size_t axis) const { return shape_.at(axis); }
  Index size() const { return static_cast<Index>(data_.size()); }

  std::span<Scalar> data() { return data_; }
  std::span<const Scalar> data() const { return data_; }
  const std::vector<Scalar>& values() const { return data_; }

  Scalar& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }
  const Scalar& operator[](Index i) const {
    return data_[static_cast<std::size_t>(i)];
  }

  Scalar& operator()(Index i, Index j) { return data_[offset(i, j)]; }
  const Scalar& operator()(Index i, Index j) const {
    return data_[offset(i, j)];
  }
  Scalar& operator()(Index n, Index c, Index h, Index w) {
    return data_[offset(n, c, h, w)];
  }
  const Scalar& operator()(Index n, Index c, Index h, Index w) const {
    return data_[offset(n, c, h, w)];
  }

  // Views the buffer as a rows x cols matrix; rows * cols must equal size().
  MatrixMap matrix(Index rows, Index cols) {
    check_view(rows, cols);
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    check_view(rows, cols);
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  TensorT reshaped(Shape shape) const& { return TensorT(std::move(shape), data_); }
  TensorT reshaped(Shape shape) && {
    return TensorT(std::move(shape), std::move(data_));
  }

  friend bool operator==(const TensorT&, const TensorT&) = default;

 private:
  void check_extents() const {
    for (Index e : shape_) {
      if (e < 0) throw ShapeError("negative extent in " + shape_string(shape_));
    }
  }
  void check_view(Index rows, Index cols) const {
    if (rows * cols != size()) {
      throw ShapeError("cannot view " + shape_string(shape_) + " as " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::size_t offset(Index i, Index j) const {
    return static_cast<std::size_t>(i * shape_[1] + j);
  }
  std::size_t offset(Index n, Index c, Index h, Index w) const {
    return static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + h) *
                                        shape_[3] +
                                    w);
  }

  Shape shape_;
  std::vector<Scalar> data_;
};

using Tensor = TensorT<float>;

// Stacks equally shaped tensors along a new leading axis.
template <typename Scalar>
TensorT<Scalar> stack(std::span<const TensorT<Scalar>> items) {
  if (items.empty()) throw ShapeError("stack: no tensors given");
  Shape shape = items.front().shape();
  std::vector<Scalar> data;
  data.reserve(static_cast<std::size_t>(shape_size(shape)) * items.size());
  for (const auto& t : items) {
    if (t.shape() != shape) {
      throw ShapeError("stack: shape " + shape_string(t.shape()) +
                       " differs from " + shape_string(shape));
    }
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  shape.insert(shape.begin(), static_cast<Index>(items.size()));
  return TensorT<Scalar>(std::move(shape), std::move(data));
}

}  // namespace deepsent

#endif  // DEEPSENT_TENSOR_HPP_
