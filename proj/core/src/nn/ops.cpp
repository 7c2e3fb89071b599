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

#include "glyphembed/nn/ops.hpp"

#include <cmath>
#include <sstream>

#include "glyphembed/error.hpp"

namespace glyphembed::nn {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<std::size_t>& expected, const char* what) {
  if (t.shape != expected) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": expected " + shape_string(expected) + ", got " + shape_string(t.shape));
  }
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t hw = g.height * g.width;
  const std::size_t ncols = g.col_cols();
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        T* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * ncols;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const T* plane = x + c * g.batch * hw + b * hw;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - pad;
            T* out = row + (b * ho + oy) * wo;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
              std::fill(out, out + wo, T(0));
              continue;
            }
            const T* src = plane + iy * g.width;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - pad;
              out[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) ? T(0) : src[ix];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, const ConvGeometry& g, T* x) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t hw = g.height * g.width;
  const std::size_t ncols = g.col_cols();
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const T* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * ncols;
        for (std::size_t b = 0; b < g.batch; ++b) {
          T* plane = x + c * g.batch * hw + b * hw;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
            const T* in = row + (b * ho + oy) * wo;
            T* dst = plane + iy * g.width;
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - pad;
              if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) dst[ix] += in[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Tensor<T>& cols, Tensor<T>& y) {
  const auto w = weight.matrix();
  const auto c = cols.matrix();
  y.shape = {static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(c.cols())};
  y.values.resize(Tensor<T>::count(y.shape));
  auto out = y.matrix();
  out.noalias() = w * c;
  out.colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(bias.data(), w.rows());
}

template <typename T>
void add_row_sums(const Tensor<T>& m, T* out) {
  const std::size_t rows = static_cast<std::size_t>(m.rows()), cols = static_cast<std::size_t>(m.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = m.data() + r * cols;
    T s = 0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c];
    out[r] += s;
  }
}

template <typename T>
void add_col_sums(const Tensor<T>& m, T* out) {
  const std::size_t rows = static_cast<std::size_t>(m.rows()), cols = static_cast<std::size_t>(m.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c];
  }
}

template <typename T>
void conv_backward(const Tensor<T>& weight, const Tensor<T>& cols, const Tensor<T>& dy, Tensor<T>& dweight,
                   Tensor<T>& dbias, Tensor<T>& dcols) {
  const auto g = dy.matrix();
  dweight.matrix().noalias() += g * cols.matrix().transpose();
  add_row_sums(dy, dbias.data());
  dcols.shape = cols.shape;
  dcols.values.resize(cols.size());
  dcols.matrix().noalias() = weight.matrix().transpose() * g;
}

template <typename T>
void linear_forward(const Tensor<T>& weight, const Tensor<T>& bias, const Tensor<T>& x, Tensor<T>& y) {
  const auto w = weight.matrix();
  const auto in = x.matrix();
  if (in.cols() != w.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linear: input width " + std::to_string(in.cols()) + ", expected " +
                                              std::to_string(w.cols()));
  }
  y.shape = {static_cast<std::size_t>(in.rows()), static_cast<std::size_t>(w.rows())};
  y.values.resize(Tensor<T>::count(y.shape));
  auto out = y.matrix();
  out.noalias() = in * w.transpose();
  out.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.data(), w.rows());
}

template <typename T>
void linear_backward(const Tensor<T>& weight, const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dweight,
                     Tensor<T>& dbias, Tensor<T>* dx) {
  const auto g = dy.matrix();
  dweight.matrix().noalias() += g.transpose() * x.matrix();
  add_col_sums(dy, dbias.data());
  if (dx) {
    dx->shape = x.shape;
    dx->values.resize(x.size());
    dx->matrix().noalias() = g * weight.matrix();
  }
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (auto& v : x.values) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_backward_inplace(const Tensor<T>& y, Tensor<T>& dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(y[i] > T(0))) dy[i] = T(0);
  }
}

template <typename T>
void sigmoid_inplace(Tensor<T>& x) {
  for (auto& v : x.values) v = T(1) / (T(1) + std::exp(-v));
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x, std::size_t batch, std::size_t hw) {
  const std::size_t channels = static_cast<std::size_t>(x.rows());
  Tensor<T> y({batch, channels});
  const T inv = T(1) / static_cast<T>(hw);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t b = 0; b < batch; ++b) {
      const T* p = x.data() + c * batch * hw + b * hw;
      T sum = 0;
      for (std::size_t i = 0; i < hw; ++i) sum += p[i];
      y[b * channels + c] = sum * inv;
    }
  }
  return y;
}

template <typename T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& dy, std::size_t channels, std::size_t batch, std::size_t hw) {
  Tensor<T> dx({channels, batch * hw});
  const T inv = T(1) / static_cast<T>(hw);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t b = 0; b < batch; ++b) {
      const T g = dy[b * channels + c] * inv;
      std::fill_n(dx.data() + c * batch * hw + b * hw, hw, g);
    }
  }
  return dx;
}

#define GLYPHEMBED_INSTANTIATE_OPS(T)                                                                            \
  template void require_shape(const Tensor<T>&, const std::vector<std::size_t>&, const char*);                \
  template void im2col(const T*, const ConvGeometry&, T*);                                                      \
  template void col2im(const T*, const ConvGeometry&, T*);                                                      \
  template void conv_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);                 \
  template void add_row_sums(const Tensor<T>&, T*);                                                            \
  template void add_col_sums(const Tensor<T>&, T*);                                                            \
  template void conv_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,     \
                              Tensor<T>&);                                                                      \
  template void linear_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);               \
  template void linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,   \
                                Tensor<T>*);                                                                    \
  template void relu_inplace(Tensor<T>&);                                                                       \
  template void relu_backward_inplace(const Tensor<T>&, Tensor<T>&);                                            \
  template void sigmoid_inplace(Tensor<T>&);                                                                    \
  template Tensor<T> global_avg_pool(const Tensor<T>&, std::size_t, std::size_t);                               \
  template Tensor<T> global_avg_pool_backward(const Tensor<T>&, std::size_t, std::size_t, std::size_t);

GLYPHEMBED_INSTANTIATE_OPS(float)
GLYPHEMBED_INSTANTIATE_OPS(double)
GLYPHEMBED_INSTANTIATE_OPS(long double)  // finite-difference oracles

}  // namespace glyphembed::nn
