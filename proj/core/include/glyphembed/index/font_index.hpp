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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/eval/embedding_table.hpp"
#include "glyphembed/glyphset/dataset.hpp"
#include "glyphembed/glyphset/image.hpp"
#include "glyphembed/nn/models.hpp"

namespace glyphembed::index {

inline constexpr std::uint32_t kIndexVersion = 1;

// Per-glyph and per-font embeddings for exhaustive retrieval. Treated as
// immutable once built; all queries are const and safe to run concurrently.
struct FontEmbeddingIndex {
  std::string checkpoint_id;
  eval::EmbeddingTable glyphs;
  eval::Aggregation aggregation = eval::Aggregation::Mean;
  std::vector<float> aggregates;  // num_fonts x feat_dim
  int glyph_size = 64;
  // Preview strip per font, relative to the index file's directory. Empty when
  // no previews were rendered.
  std::vector<std::string> previews;

  std::size_t num_fonts() const noexcept { return glyphs.num_fonts(); }
  std::size_t feat_dim() const noexcept { return glyphs.feat_dim; }
  const std::vector<std::string>& font_ids() const noexcept { return glyphs.font_ids; }
  std::span<const float> aggregate(std::size_t font) const {
    return {aggregates.data() + font * feat_dim(), feat_dim()};
  }
  // Throws UnknownFont.
  std::size_t font_index(const std::string& font_id) const;
  // Throws UnknownCharacter.
  std::size_t char_index(char32_t codepoint) const;
};

FontEmbeddingIndex build_index(eval::EmbeddingTable table, eval::Aggregation aggregation,
                               std::string checkpoint_id = {}, int glyph_size = 64);
FontEmbeddingIndex build_index(const nn::Encoder<float>& model, const glyphset::GlyphDataset& dataset,
                               eval::Aggregation aggregation, std::string checkpoint_id = {});

enum class QueryMode { PerGlyph, Aggregate };
QueryMode query_mode_from_string(std::string_view s);
std::string_view to_string(QueryMode m);

struct QueryHit {
  std::size_t font = 0;
  std::string font_id;
  double distance = 0.0;  // Euclidean
  std::optional<char32_t> best_char;  // per-glyph mode only
};

// Ranks fonts by ascending L2 distance to the probe vector; per-glyph mode
// scores a font by its closest glyph. Ties go to the lower font index; k is
// clamped to the font count. Throws EmptyIndex, ShapeMismatch, InvalidArgument
// (k = 0).
std::vector<QueryHit> query(const FontEmbeddingIndex& index, std::span<const float> probe, std::size_t k,
                            QueryMode mode = QueryMode::PerGlyph);
// Encodes an image probe first, resampling it to the index glyph size. Throws
// ModelUnavailable when `model` is null.
std::vector<QueryHit> query(const FontEmbeddingIndex& index, const nn::Encoder<float>* model,
                            const glyphset::GlyphImage& probe, std::size_t k, QueryMode mode = QueryMode::PerGlyph);

// 2-D principal-component map of the per-font aggregates.
struct MapProjection {
  std::vector<std::string> font_ids;
  std::vector<double> coords;  // num_fonts x 2
  std::vector<double> basis;   // 2 x feat_dim, orthonormal rows
  std::vector<double> explained_variance;  // fraction of total variance per axis
  std::string method = "pca";

  double x(std::size_t i) const { return coords[2 * i]; }
  double y(std::size_t i) const { return coords[2 * i + 1]; }
};

// Each basis vector's largest-magnitude component is made positive. Throws
// DegenerateData for fewer than three fonts or zero variance.
MapProjection project_2d(const FontEmbeddingIndex& index);
MapProjection project_2d(std::span<const float> rows, std::size_t n, std::size_t dim,
                         std::vector<std::string> font_ids = {});

// "GIDX" container. Throws Corrupt / VersionMismatch on load.
std::vector<std::uint8_t> serialize_index(const FontEmbeddingIndex& index);
FontEmbeddingIndex deserialize_index(const std::vector<std::uint8_t>& bytes);
void save_index(const FontEmbeddingIndex& index, const std::filesystem::path& path);
FontEmbeddingIndex load_index(const std::filesystem::path& path);

// Sibling directory for an index file's previews: `<stem>_previews`.
std::filesystem::path preview_dir(const std::filesystem::path& index_path);

// Renders `<dir>/<font_id>.png` ("AaBb123" strip, falling back to the first
// dataset glyphs when the source lacks those characters) and
// `<dir>/<font_id>/<hex>.png` for every dataset glyph. Sets index.previews to
// paths relative to the parent of `dir`.
void write_previews(FontEmbeddingIndex& index, const glyphset::GlyphDataset& dataset,
                    const std::filesystem::path& dir);

}  // namespace glyphembed::index
