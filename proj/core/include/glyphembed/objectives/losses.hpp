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
#include <span>
#include <string_view>
#include <vector>

#include "glyphembed/nn/tensor.hpp"

// Training objectives. Inputs may be float or double; every reduction runs in
// double. Each loss optionally writes d(loss)/d(input) of the input's type.
namespace glyphembed::objectives {

using nn::Tensor;

struct LossValue {
  double value = 0.0;
  std::vector<double> terms;  // per anchor / row, before averaging
};

// Cosine of the angle between u and v. Errors: ZeroVector, ShapeMismatch.
double cosine_sim(std::span<const double> u, std::span<const double> v);

// Row-wise L2 normalization and its backward pass. Errors: ZeroVector.
template <typename T>
Tensor<T> l2_normalize_rows(const Tensor<T>& z);
template <typename T>
Tensor<T> l2_normalize_rows_backward(const Tensor<T>& z, const Tensor<T>& dzhat);

// Normalization of the summed anchor terms. PerFont: 1/N over fonts (each font
// contributes both of its glyphs as anchors). PerAnchor: 1/(2N), the mean over
// all 2N anchors. The denominators are identical in both modes.
enum class Denominator { PerFont, PerAnchor };
Denominator denominator_from_string(std::string_view s);
std::string_view to_string(Denominator d);

// Temperature-scaled cross entropy over positive glyph pairs. z is 2N x d with
// rows 2n and 2n+1 from font n. For anchor glyph k of font n with partner p:
//   term = -log( e^{s(k,p)/tau} / (e^{s(k,p)/tau} + sum_{m != n, l} e^{s(k,(m,l))/tau}) )
// where s is the cosine similarity. Errors: BadBatch (odd rows, N < 2, tau <= 0),
// ZeroVector.
template <typename T>
LossValue paired_glyph_loss(const Tensor<T>& z, double tau, Denominator mode = Denominator::PerFont,
                            Tensor<T>* dz = nullptr);

// Mean over rows of max(0, |a-p| - |a-n| + margin). Errors: ShapeMismatch.
template <typename T>
LossValue triplet_loss(const Tensor<T>& anchor, const Tensor<T>& positive, const Tensor<T>& negative, double margin,
                       Tensor<T>* danchor = nullptr, Tensor<T>* dpositive = nullptr, Tensor<T>* dnegative = nullptr);

// Triplet objective over a paired-glyph minibatch z (2N x d, rows 2n and 2n+1
// from font n). Rows are L2-normalized; every glyph anchors once with its
// partner as positive against each of the 2(N-1) glyphs of other fonts, and
// the loss is the mean over those triplets. Errors: BadBatch, ZeroVector.
template <typename T>
LossValue batch_triplet_loss(const Tensor<T>& z, double margin, Tensor<T>* dz = nullptr);

// Mean softmax cross entropy. Errors: LabelOutOfRange, ShapeMismatch.
template <typename T>
LossValue classification_loss(const Tensor<T>& logits, std::span<const std::size_t> labels,
                              Tensor<T>* dlogits = nullptr);

// Mean absolute error over every element. Errors: ShapeMismatch. The
// subgradient at pred == target is zero.
template <typename T>
LossValue reconstruction_loss(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* dpred = nullptr);

template <typename T>
LossValue attribute_l1(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* dpred = nullptr) {
  return reconstruction_loss(pred, target, dpred);
}

}  // namespace glyphembed::objectives
