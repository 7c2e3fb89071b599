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

#include <cstdint>
#include <vector>

#include "glyphembed/nn/param_store.hpp"

namespace glyphembed::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments for one ParamStore, aligned by slot index.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<nn::Tensor<T>> m;
  std::vector<nn::Tensor<T>> v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(const nn::ParamStore<T>& params, AdamConfig cfg = {});
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  t <- t+1
// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), with bias-corrected
// m_hat = m / (1 - b1^t), v_hat = v / (1 - b2^t).
// Throws NonFiniteGradient (parameters untouched) if any gradient is NaN/inf.
template <typename T>
void adam_step(nn::ParamStore<T>& params, AdamState<T>& state, double lr);

}  // namespace glyphembed::train
