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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glyphembed/eval/embedding_table.hpp"

namespace glyphembed::eval {

inline constexpr std::size_t kDefaultAttributes = 37;

// font_id -> attribute vector in [0, 1]. CSV header: font_id,attr_1,...,attr_n.
struct AttributeTable {
  std::vector<std::string> font_ids;
  std::size_t n_attributes = kDefaultAttributes;
  std::vector<double> values;  // [font][attr]

  std::size_t num_fonts() const noexcept { return font_ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * n_attributes, n_attributes}; }
  // Throws MissingAttributes.
  std::size_t index_of(const std::string& font_id) const;

  // Errors: InvalidArgument (unreadable file, malformed CSV, values outside
  // [0, 1]).
  static AttributeTable read_csv(const std::filesystem::path& path);
  static AttributeTable parse_csv(const std::string& text);
  std::string to_csv() const;
};

struct ProbeOptions {
  std::vector<double> lr_grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  std::size_t steps = 2000;
  std::size_t eval_every = 100;
};

struct ProbeResult {
  double best_l1 = 0.0;
  double best_lr = 0.0;
  std::size_t best_step = 0;
  std::vector<double> best_l1_per_lr;  // aligned with the lr grid
  // Validation L1 of predicting the training-set mean of every attribute.
  double mean_baseline_l1 = 0.0;
};

// Linear probe from per-font max-pooled embeddings to attributes. For each
// learning rate a zero-initialized affine map is trained full-batch with Adam
// on the L1 loss over the training fonts; predictions are clamped to [0, 1]
// for validation, which runs every eval_every steps. Reports the lowest
// validation L1 over the grid. Errors: MissingAttributes, InvalidArgument.
ProbeResult linear_probe(const EmbeddingTable& table, const AttributeTable& attrs,
                         std::span<const std::string> train_fonts, std::span<const std::string> val_fonts,
                         const ProbeOptions& options = {});

}  // namespace glyphembed::eval
