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

#include <cstddef>

#include "glyphembed/nn/tensor.hpp"

// Layer kernels. Feature maps use a channel-major layout, C x (B*H*W): each
// row is one channel across the whole batch, so a convolution over the batch
// is a single GEMM against the im2col matrix.
namespace glyphembed::nn {

struct ConvGeometry {
  std::size_t channels = 0;  // input channels of the (forward) convolution
  std::size_t batch = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
  std::size_t col_rows() const { return channels * kernel * kernel; }
  std::size_t col_cols() const { return batch * out_height() * out_width(); }
};

// x: C x (B*H*W) -> cols: (C*k*k) x (B*Ho*Wo). Padding reads as zero.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols);

// Adjoint of im2col; accumulates into x (which the caller zeroes).
template <typename T>
void col2im(const T* cols, const ConvGeometry& g, T* x);

// y = W * cols + b. W: Cout x (Cin*k*k); y: Cout x (B*Ho*Wo).
template <typename T>
void conv_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Tensor<T>& cols, Tensor<T>& y);

// Accumulates weight/bias gradients and returns d(cols).
template <typename T>
void conv_backward(const Tensor<T>& weight, const Tensor<T>& cols, const Tensor<T>& dy, Tensor<T>& dweight,
                   Tensor<T>& dbias, Tensor<T>& dcols);

// out[r] += sum_c m(r, c) over a row-major rows x cols block, in a fixed order.
// Eigen's vectorized reductions reorder additions by buffer alignment, which
// breaks bitwise reproducibility across allocations.
template <typename T>
void add_row_sums(const Tensor<T>& m, T* out);
// out[c] += sum_r m(r, c), likewise ordered.
template <typename T>
void add_col_sums(const Tensor<T>& m, T* out);

// Y = X W^T + b. X: B x in; W: out x in; Y: B x out.
template <typename T>
void linear_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Tensor<T>& x, Tensor<T>& y);

// Accumulates dW, db; writes dX when non-null.
template <typename T>
void linear_backward(const Tensor<T>& weight, const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dweight,
                     Tensor<T>& dbias, Tensor<T>* dx);

template <typename T>
void relu_inplace(Tensor<T>& x);

// dy is masked where the forward output y was zero.
template <typename T>
void relu_backward_inplace(const Tensor<T>& y, Tensor<T>& dy);

template <typename T>
void sigmoid_inplace(Tensor<T>& x);

// Global average pooling: C x (B*HW) -> B x C.
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x, std::size_t batch, std::size_t hw);

template <typename T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& dy, std::size_t channels, std::size_t batch, std::size_t hw);

}  // namespace glyphembed::nn
