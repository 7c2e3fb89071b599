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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/glyphset/charset.hpp"
#include "glyphembed/glyphset/dataset.hpp"
#include "glyphembed/nn/models.hpp"

namespace glyphembed::eval {

// One embedding per (font, character), stored [font][char][feat].
struct EmbeddingTable {
  std::vector<std::string> font_ids;
  glyphset::CharSet charset{"0", {U'0'}};
  std::size_t feat_dim = 0;
  std::string source;
  std::vector<float> values;

  std::size_t num_fonts() const noexcept { return font_ids.size(); }
  std::span<const float> vec(std::size_t font, std::size_t char_index) const {
    return {values.data() + (font * charset.size() + char_index) * feat_dim, feat_dim};
  }
  std::span<float> vec(std::size_t font, std::size_t char_index) {
    return {values.data() + (font * charset.size() + char_index) * feat_dim, feat_dim};
  }
  std::size_t font_index(const std::string& font_id) const;

  // Throws ShapeMismatch on inconsistent sizes, InvalidArgument on
  // non-finite values.
  void validate() const;

  // {"source", "charset", "feat_dim", "fonts": [{"font_id", "glyphs": {"<char>": [..]}}]}
  // Glyph keys are the character itself or "U+XXXX".
  nlohmann::json to_json() const;
  static EmbeddingTable from_json(const nlohmann::json& j);
};

// Encodes every glyph of the dataset with the model, in fixed-size batches.
EmbeddingTable embed_all(const nn::Encoder<float>& model, const glyphset::GlyphDataset& dataset,
                         std::size_t batch_size = 64, std::string source = {});

enum class Aggregation { Mean, MaxPool };
Aggregation aggregation_from_string(std::string_view s);
std::string_view to_string(Aggregation a);

// Per-font reduction over the font's glyph vectors: num_fonts x feat_dim.
std::vector<float> aggregate_fonts(const EmbeddingTable& table, Aggregation mode);

}  // namespace glyphembed::eval
