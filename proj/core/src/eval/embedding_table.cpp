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

#include "glyphembed/eval/embedding_table.hpp"

#include <algorithm>
#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed::eval {

using glyphset::CharSet;

std::size_t EmbeddingTable::font_index(const std::string& font_id) const {
  const auto it = std::find(font_ids.begin(), font_ids.end(), font_id);
  if (it == font_ids.end()) throw Error(ErrorCode::UnknownFont, "no font '" + font_id + "' in embedding table");
  return static_cast<std::size_t>(it - font_ids.begin());
}

void EmbeddingTable::validate() const {
  if (feat_dim == 0) throw Error(ErrorCode::ShapeMismatch, "embedding table has feat_dim 0");
  if (values.size() != font_ids.size() * charset.size() * feat_dim) {
    throw Error(ErrorCode::ShapeMismatch, "embedding table holds " + std::to_string(values.size()) +
                                              " values, expected fonts x chars x feat_dim");
  }
  for (const float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "embedding table contains non-finite values");
  }
}

nlohmann::json EmbeddingTable::to_json() const {
  nlohmann::json fonts = nlohmann::json::array();
  for (std::size_t f = 0; f < font_ids.size(); ++f) {
    nlohmann::json glyphs = nlohmann::json::object();
    for (std::size_t c = 0; c < charset.size(); ++c) {
      const auto v = vec(f, c);
      glyphs[glyphset::codepoint_label(charset[c])] = std::vector<float>(v.begin(), v.end());
    }
    fonts.push_back({{"font_id", font_ids[f]}, {"glyphs", glyphs}});
  }
  std::vector<std::string> cps;
  for (const auto cp : charset.codepoints()) cps.push_back(glyphset::codepoint_label(cp));
  return {{"source", source}, {"charset", charset.id()}, {"codepoints", cps}, {"feat_dim", feat_dim}, {"fonts", fonts}};
}

namespace {

char32_t parse_label(const std::string& s) {
  if (s.size() > 2 && s[0] == 'U' && s[1] == '+') return static_cast<char32_t>(std::stoul(s.substr(2), nullptr, 16));
  const auto cp = glyphset::decode_single_utf8(s);
  if (!cp) throw Error(ErrorCode::InvalidCharset, "bad character key '" + s + "'");
  return *cp;
}

}  // namespace

EmbeddingTable EmbeddingTable::from_json(const nlohmann::json& j) {
  EmbeddingTable t;
  try {
    t.source = j.value("source", std::string());
    const auto id = j.at("charset").get<std::string>();
    if (j.contains("codepoints")) {
      std::vector<char32_t> cps;
      for (const auto& s : j.at("codepoints")) cps.push_back(parse_label(s.get<std::string>()));
      t.charset = CharSet(id, std::move(cps));
    } else {
      t.charset = CharSet::named(id);
    }
    t.feat_dim = j.at("feat_dim").get<std::size_t>();
    for (const auto& font : j.at("fonts")) {
      t.font_ids.push_back(font.at("font_id").get<std::string>());
      const auto& glyphs = font.at("glyphs");
      for (const auto cp : t.charset.codepoints()) {
        const auto key = glyphset::codepoint_label(cp);
        if (!glyphs.contains(key)) {
          throw Error(ErrorCode::MissingGlyph, "font '" + t.font_ids.back() + "' has no embedding for " + key);
        }
        const auto v = glyphs.at(key).get<std::vector<float>>();
        if (v.size() != t.feat_dim) {
          throw Error(ErrorCode::ShapeMismatch, "embedding for " + key + " has length " + std::to_string(v.size()));
        }
        t.values.insert(t.values.end(), v.begin(), v.end());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("embedding table JSON: ") + e.what());
  }
  t.validate();
  return t;
}

EmbeddingTable embed_all(const nn::Encoder<float>& model, const glyphset::GlyphDataset& dataset,
                         std::size_t batch_size, std::string source) {
  if (model.config().input_size != dataset.size()) {
    throw Error(ErrorCode::ShapeMismatch, "model input size " + std::to_string(model.config().input_size) +
                                              " differs from dataset size " + std::to_string(dataset.size()));
  }
  EmbeddingTable table;
  table.font_ids = dataset.font_ids();
  table.charset = dataset.charset();
  table.feat_dim = static_cast<std::size_t>(model.config().feat_dim);
  table.source = std::move(source);
  const std::size_t n_chars = dataset.charset().size();
  const std::size_t total = dataset.num_images();
  const std::size_t ppi = dataset.pixels_per_image();
  const auto size = static_cast<std::size_t>(dataset.size());
  table.values.resize(total * table.feat_dim);
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < total; start += batch_size) {
    const std::size_t count = std::min(batch_size, total - start);
    nn::Tensor<float> x({count, size, size});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t flat = start + i;
      const auto px = dataset.pixels(flat / n_chars, flat % n_chars);
      std::copy(px.begin(), px.end(), x.data() + i * ppi);
    }
    const auto feats = model.forward(x);
    std::copy(feats.values.begin(), feats.values.end(), table.values.begin() + start * table.feat_dim);
  }
  return table;
}

Aggregation aggregation_from_string(std::string_view s) {
  if (s == "mean") return Aggregation::Mean;
  if (s == "maxpool" || s == "max") return Aggregation::MaxPool;
  throw Error(ErrorCode::InvalidArgument, "aggregation must be 'mean' or 'maxpool', got '" + std::string(s) + "'");
}

std::string_view to_string(Aggregation a) { return a == Aggregation::Mean ? "mean" : "maxpool"; }

std::vector<float> aggregate_fonts(const EmbeddingTable& table, Aggregation mode) {
  const std::size_t d = table.feat_dim, n_chars = table.charset.size();
  std::vector<float> out(table.num_fonts() * d);
  for (std::size_t f = 0; f < table.num_fonts(); ++f) {
    for (std::size_t k = 0; k < d; ++k) {
      if (mode == Aggregation::Mean) {
        double sum = 0;
        for (std::size_t c = 0; c < n_chars; ++c) sum += table.vec(f, c)[k];
        out[f * d + k] = static_cast<float>(sum / static_cast<double>(n_chars));
      } else {
        float mx = table.vec(f, 0)[k];
        for (std::size_t c = 1; c < n_chars; ++c) mx = std::max(mx, table.vec(f, c)[k]);
        out[f * d + k] = mx;
      }
    }
  }
  return out;
}

}  // namespace glyphembed::eval
