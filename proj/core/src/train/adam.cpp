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

#include "glyphembed/train/adam.hpp"

#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed::train {

template <typename T>
AdamState<T>::AdamState(const nn::ParamStore<T>& params, AdamConfig cfg) : config(cfg) {
  for (const auto& e : params) {
    m.emplace_back(e.value.shape);
    v.emplace_back(e.value.shape);
  }
}

template <typename T>
void adam_step(nn::ParamStore<T>& params, AdamState<T>& state, double lr) {
  if (state.m.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "Adam state does not match the parameter store");
  }
  for (const auto& e : params) {
    if (!e.grad.all_finite()) throw Error(ErrorCode::NonFiniteGradient, "non-finite gradient in " + e.name);
  }
  const auto& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double g = e.grad[j];
      const double mj = c.beta1 * static_cast<double>(m[j]) + (1.0 - c.beta1) * g;
      const double vj = c.beta2 * static_cast<double>(v[j]) + (1.0 - c.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double m_hat = mj / bc1;
      const double v_hat = vj / bc2;
      e.value[j] = static_cast<T>(static_cast<double>(e.value[j]) - lr * m_hat / (std::sqrt(v_hat) + c.eps));
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(nn::ParamStore<float>&, AdamState<float>&, double);
template void adam_step(nn::ParamStore<double>&, AdamState<double>&, double);

}  // namespace glyphembed::train
