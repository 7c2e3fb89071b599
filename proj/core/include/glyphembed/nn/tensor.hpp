/*
 * Copyright (C) 2026 The glyphembed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace glyphembed::nn {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

// Dense row-major array. float for training, double for verification.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, T fill = T(0))
      : shape(std::move(dims)), values(count(shape), fill) {}
  Tensor(std::vector<std::size_t> dims, std::vector<T> data) : shape(std::move(dims)), values(std::move(data)) {}

  static std::size_t count(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  T* data() noexcept { return values.data(); }
  const T* data() const noexcept { return values.data(); }
  T& operator[](std::size_t i) { return values[i]; }
  const T& operator[](std::size_t i) const { return values[i]; }

  // Rank-2 view; rows = shape[0], cols = product of the rest.
  MatrixMap<T> matrix() { return {values.data(), rows(), cols()}; }
  ConstMatrixMap<T> matrix() const { return {values.data(), rows(), cols()}; }
  Eigen::Index rows() const { return shape.empty() ? 1 : static_cast<Eigen::Index>(shape[0]); }
  Eigen::Index cols() const { return rows() == 0 ? 0 : static_cast<Eigen::Index>(values.size()) / rows(); }

  void fill(T v) { std::fill(values.begin(), values.end(), v); }
  bool all_finite() const;

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape, std::vector<U>(values.begin(), values.end()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

template <typename T>
bool Tensor<T>::all_finite() const {
  for (const T v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string shape_string(const std::vector<std::size_t>& shape);

// Throws Error(ShapeMismatch) unless `t` has exactly `expected` shape.
template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<std::size_t>& expected, const char* what);

}  // namespace glyphembed::nn
