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

#include <optional>
#include <string>
#include <vector>

#include "glyphembed/nn/tensor.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::nn {

// Ordered named parameters, each with a gradient slot of the same shape.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
  };

  // Returns the slot index. Duplicate names throw InvalidArgument.
  std::size_t add(const std::string& name, std::vector<std::size_t> shape);

  std::size_t size() const noexcept { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  std::size_t num_scalars() const;

  // Kaiming-uniform: U(-b, b), b = sqrt(6 / fan_in).
  void kaiming_uniform(std::size_t index, std::size_t fan_in, Rng& rng);

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& e : entries_) {
      const auto i = out.add(e.name, e.value.shape);
      out[i].value = e.value.template cast<U>();
      out[i].grad = e.grad.template cast<U>();
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace glyphembed::nn
