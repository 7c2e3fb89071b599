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

#include "glyphembed/nn/param_store.hpp"

#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed::nn {

template <typename T>
std::size_t ParamStore<T>::add(const std::string& name, std::vector<std::size_t> shape) {
  if (find(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter '" + name + "'");
  Entry e{name, Tensor<T>(shape), Tensor<T>(shape)};
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

template <typename T>
std::optional<std::size_t> ParamStore<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

template <typename T>
typename ParamStore<T>::Entry& ParamStore<T>::at(const std::string& name) {
  const auto i = find(name);
  if (!i) throw Error(ErrorCode::InvalidArgument, "no parameter '" + name + "'");
  return entries_[*i];
}

template <typename T>
const typename ParamStore<T>::Entry& ParamStore<T>::at(const std::string& name) const {
  const auto i = find(name);
  if (!i) throw Error(ErrorCode::InvalidArgument, "no parameter '" + name + "'");
  return entries_[*i];
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& e : entries_) e.grad.fill(T(0));
}

template <typename T>
std::size_t ParamStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

template <typename T>
void ParamStore<T>::kaiming_uniform(std::size_t index, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : entries_.at(index).value.values) v = static_cast<T>(rng.uniform(-bound, bound));
}

template class ParamStore<float>;
template class ParamStore<double>;
template class ParamStore<long double>;

}  // namespace glyphembed::nn
