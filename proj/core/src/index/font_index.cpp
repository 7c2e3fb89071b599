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

#include "glyphembed/index/font_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "glyphembed/error.hpp"
#include "glyphembed/nn/checkpoint.hpp"

namespace glyphembed::index {

namespace fs = std::filesystem;
using eval::EmbeddingTable;

std::size_t FontEmbeddingIndex::font_index(const std::string& font_id) const {
  const auto& ids = glyphs.font_ids;
  const auto it = std::find(ids.begin(), ids.end(), font_id);
  if (it == ids.end()) throw Error(ErrorCode::UnknownFont, "font '" + font_id + "' is not indexed");
  return static_cast<std::size_t>(it - ids.begin());
}

std::size_t FontEmbeddingIndex::char_index(char32_t codepoint) const {
  const auto i = glyphs.charset.index_of(codepoint);
  if (!i) {
    throw Error(ErrorCode::UnknownCharacter,
                "character " + glyphset::codepoint_label(codepoint) + " is not in charset " + glyphs.charset.id());
  }
  return *i;
}

FontEmbeddingIndex build_index(EmbeddingTable table, eval::Aggregation aggregation, std::string checkpoint_id,
                               int glyph_size) {
  table.validate();
  FontEmbeddingIndex index;
  index.checkpoint_id = std::move(checkpoint_id);
  index.aggregation = aggregation;
  index.glyph_size = glyph_size;
  index.aggregates = eval::aggregate_fonts(table, aggregation);
  index.glyphs = std::move(table);
  return index;
}

FontEmbeddingIndex build_index(const nn::Encoder<float>& model, const glyphset::GlyphDataset& dataset,
                               eval::Aggregation aggregation, std::string checkpoint_id) {
  if (dataset.size() != model.config().input_size) {
    throw Error(ErrorCode::ShapeMismatch, "dataset glyph size " + std::to_string(dataset.size()) +
                                              " differs from model input " +
                                              std::to_string(model.config().input_size));
  }
  auto table = eval::embed_all(model, dataset, 64, checkpoint_id);
  return build_index(std::move(table), aggregation, std::move(checkpoint_id), dataset.size());
}

QueryMode query_mode_from_string(std::string_view s) {
  if (s == "per_glyph") return QueryMode::PerGlyph;
  if (s == "aggregate") return QueryMode::Aggregate;
  throw Error(ErrorCode::InvalidArgument, "unknown query mode '" + std::string(s) + "'");
}

std::string_view to_string(QueryMode m) { return m == QueryMode::PerGlyph ? "per_glyph" : "aggregate"; }

namespace {

double squared_l2(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<QueryHit> query(const FontEmbeddingIndex& index, std::span<const float> probe, std::size_t k,
                            QueryMode mode) {
  if (index.num_fonts() == 0) throw Error(ErrorCode::EmptyIndex, "index holds no fonts");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (probe.size() != index.feat_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "probe has " + std::to_string(probe.size()) + " dims, index has " +
                                              std::to_string(index.feat_dim()));
  }
  const std::size_t n = index.num_fonts(), n_chars = index.glyphs.charset.size();
  std::vector<QueryHit> hits(n);
  for (std::size_t f = 0; f < n; ++f) {
    auto& h = hits[f];
    h.font = f;
    h.font_id = index.glyphs.font_ids[f];
    if (mode == QueryMode::Aggregate) {
      h.distance = squared_l2(probe, index.aggregate(f));
      continue;
    }
    std::size_t best = 0;
    double best_d = squared_l2(probe, index.glyphs.vec(f, 0));
    for (std::size_t c = 1; c < n_chars; ++c) {
      const double d = squared_l2(probe, index.glyphs.vec(f, c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    h.distance = best_d;
    h.best_char = index.glyphs.charset[best];
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const QueryHit& a, const QueryHit& b) { return a.distance < b.distance; });
  hits.resize(std::min(k, n));
  for (auto& h : hits) h.distance = std::sqrt(h.distance);
  return hits;
}

std::vector<QueryHit> query(const FontEmbeddingIndex& index, const nn::Encoder<float>* model,
                            const glyphset::GlyphImage& probe, std::size_t k, QueryMode mode) {
  if (!model) throw Error(ErrorCode::ModelUnavailable, "image queries need the index's model");
  if (probe.size <= 0 || probe.pixels.size() != static_cast<std::size_t>(probe.size) * probe.size) {
    throw Error(ErrorCode::InvalidArgument, "probe image is not square");
  }
  glyphset::GlyphImage img = probe;
  const int target = model->config().input_size;
  if (img.size != target) {
    img.pixels = glyphset::resize_bilinear(img.pixels, img.size, img.size, target, target);
    img.size = target;
  }
  const auto z = nn::encode(*model, std::span<const glyphset::GlyphImage>(&img, 1));
  return query(index, std::span<const float>(z.data(), z.size()), k, mode);
}

MapProjection project_2d(std::span<const float> rows, std::size_t n, std::size_t dim,
                         std::vector<std::string> font_ids) {
  if (n < 3) throw Error(ErrorCode::DegenerateData, "a map needs at least three fonts");
  if (dim < 2) throw Error(ErrorCode::DegenerateData, "a map needs at least two embedding dimensions");
  if (rows.size() != n * dim) throw Error(ErrorCode::ShapeMismatch, "projection input size mismatch");
  Eigen::MatrixXd x(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = rows[i * dim + j];
  }
  if (!x.allFinite()) throw Error(ErrorCode::DegenerateData, "non-finite embeddings");
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n);
  const double total = cov.trace();
  if (!(total > 0)) throw Error(ErrorCode::DegenerateData, "embeddings have zero variance");

  // Eigenvalues come back in ascending order.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::DegenerateData, "eigendecomposition failed");
  MapProjection m;
  m.font_ids = std::move(font_ids);
  m.basis.resize(2 * dim);
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index col = static_cast<Eigen::Index>(dim) - 1 - axis;
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t j = 0; j < dim; ++j) m.basis[axis * dim + j] = v(static_cast<Eigen::Index>(j));
    m.explained_variance.push_back(std::max(0.0, eig.eigenvalues()(col)) / total);
  }
  const Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::RowMajor>> basis(m.basis.data(), 2,
                                                                                          static_cast<Eigen::Index>(dim));
  const Eigen::MatrixXd xy = x * basis.transpose();
  m.coords.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    m.coords[2 * i] = xy(static_cast<Eigen::Index>(i), 0);
    m.coords[2 * i + 1] = xy(static_cast<Eigen::Index>(i), 1);
  }
  return m;
}

MapProjection project_2d(const FontEmbeddingIndex& index) {
  return project_2d(index.aggregates, index.num_fonts(), index.feat_dim(), index.font_ids());
}

namespace {

constexpr char kMagic[4] = {'G', 'I', 'D', 'X'};

}  // namespace

std::vector<std::uint8_t> serialize_index(const FontEmbeddingIndex& index) {
  const std::size_t n = index.num_fonts(), c = index.glyphs.charset.size(), d = index.feat_dim();
  if (index.glyphs.values.size() != n * c * d || index.aggregates.size() != n * d) {
    throw Error(ErrorCode::ShapeMismatch, "index tables are inconsistent");
  }
  const nn::Tensor<float> glyphs({n, c, d}, index.glyphs.values);
  const nn::Tensor<float> aggregates({n, d}, index.aggregates);
  std::vector<std::string> cps;
  for (const char32_t cp : index.glyphs.charset.codepoints()) cps.push_back(glyphset::codepoint_hex(cp));
  nlohmann::json fonts = nlohmann::json::array();
  for (std::size_t f = 0; f < n; ++f) {
    nlohmann::json entry{{"font_id", index.glyphs.font_ids[f]}};
    if (!index.previews.empty()) entry["preview"] = index.previews[f];
    fonts.push_back(std::move(entry));
  }
  const nlohmann::json header{
      {"checkpoint_id", index.checkpoint_id},
      {"source", index.glyphs.source},
      {"charset", {{"id", index.glyphs.charset.id()}, {"codepoints", cps}}},
      {"feat_dim", d},
      {"glyph_size", index.glyph_size},
      {"aggregation", eval::to_string(index.aggregation)},
      {"fonts", fonts},
      {"tensors",
       {{{"name", "glyphs"}, {"shape", glyphs.shape}, {"offset", 0}},
        {{"name", "aggregates"}, {"shape", aggregates.shape}, {"offset", 4 * glyphs.size()}}}}};
  return nn::container::write(kMagic, kIndexVersion, header, {&glyphs, &aggregates});
}

FontEmbeddingIndex deserialize_index(const std::vector<std::uint8_t>& bytes) {
  const auto parsed = nn::container::read(bytes, kMagic, kIndexVersion);
  const auto& h = parsed.header;
  FontEmbeddingIndex index;
  try {
    std::vector<char32_t> cps;
    for (const auto& hex : h.at("charset").at("codepoints")) {
      cps.push_back(static_cast<char32_t>(std::stoul(hex.get<std::string>(), nullptr, 16)));
    }
    index.glyphs.charset = glyphset::CharSet(h.at("charset").at("id").get<std::string>(), std::move(cps));
    index.checkpoint_id = h.at("checkpoint_id").get<std::string>();
    index.glyphs.source = h.value("source", std::string());
    index.glyphs.feat_dim = h.at("feat_dim").get<std::size_t>();
    index.glyph_size = h.at("glyph_size").get<int>();
    index.aggregation = eval::aggregation_from_string(h.at("aggregation").get<std::string>());
    bool any_preview = false;
    for (const auto& f : h.at("fonts")) {
      index.glyphs.font_ids.push_back(f.at("font_id").get<std::string>());
      index.previews.push_back(f.value("preview", std::string()));
      any_preview = any_preview || f.contains("preview");
    }
    if (!any_preview) index.previews.clear();
    const std::size_t n = index.num_fonts(), c = index.glyphs.charset.size(), d = index.feat_dim();
    const auto& tensors = h.at("tensors");
    if (tensors.size() != 2 || tensors[0].at("name") != "glyphs" || tensors[1].at("name") != "aggregates" ||
        tensors[0].at("shape").get<std::vector<std::size_t>>() != std::vector<std::size_t>{n, c, d} ||
        tensors[1].at("shape").get<std::vector<std::size_t>>() != std::vector<std::size_t>{n, d}) {
      throw Error(ErrorCode::Corrupt, "index tensor table does not match the font table");
    }
    const auto g_off = tensors[0].at("offset").get<std::uint64_t>();
    const auto a_off = tensors[1].at("offset").get<std::uint64_t>();
    index.glyphs.values = nn::container::floats(parsed, g_off, n * c * d);
    index.aggregates = nn::container::floats(parsed, a_off, n * d);
    if (std::max(g_off + 4 * n * c * d, a_off + 4 * n * d) != parsed.payload_size) {
      throw Error(ErrorCode::Corrupt, "payload size does not match the tensor table");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("index header: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::Corrupt, std::string("index header: ") + e.what());
  }
  return index;
}

void save_index(const FontEmbeddingIndex& index, const fs::path& path) {
  nn::container::write_file(path, serialize_index(index));
}

FontEmbeddingIndex load_index(const fs::path& path) { return deserialize_index(nn::container::read_file(path)); }

fs::path preview_dir(const fs::path& index_path) {
  return index_path.parent_path() / (index_path.stem().string() + "_previews");
}

namespace {

constexpr char32_t kStrip[] = {U'A', U'a', U'B', U'b', U'1', U'2', U'3'};

std::vector<std::vector<float>> strip_cells(const glyphset::GlyphDataset& dataset, std::size_t font) {
  const auto& source = dataset.fonts()[font];
  const int size = dataset.size();
  std::vector<std::vector<float>> cells;
  std::optional<glyphset::FontFile> file;
  if (source.kind == glyphset::FontSource::Kind::FontFile) {
    try {
      file = glyphset::FontFile::open(source.origin);
    } catch (const Error&) {
    }
  }
  for (const char32_t cp : kStrip) {
    if (const auto ci = dataset.charset().index_of(cp)) {
      const auto px = dataset.pixels(font, *ci);
      cells.emplace_back(px.begin(), px.end());
      continue;
    }
    try {
      if (file) {
        glyphset::RasterOptions options;
        options.size = size;
        cells.push_back(glyphset::rasterize_glyph(*file, source.font_id, cp, options).pixels);
      } else if (source.kind == glyphset::FontSource::Kind::ImageDir) {
        const auto path = source.origin / (glyphset::codepoint_hex(cp) + ".png");
        if (!fs::exists(path)) continue;
        const auto gray = glyphset::read_png(path);
        auto px = glyphset::to_unit(gray.pixels);
        if (gray.width != size || gray.height != size) {
          px = glyphset::resize_bilinear(px, gray.width, gray.height, size, size);
        }
        cells.push_back(std::move(px));
      }
    } catch (const Error&) {
      // Character unavailable in this font; the strip just omits it.
    }
  }
  for (std::size_t c = 0; cells.size() < std::size(kStrip) && c < dataset.charset().size(); ++c) {
    if (std::find(std::begin(kStrip), std::end(kStrip), dataset.charset()[c]) != std::end(kStrip)) continue;
    const auto px = dataset.pixels(font, c);
    cells.emplace_back(px.begin(), px.end());
  }
  return cells;
}

}  // namespace

void write_previews(FontEmbeddingIndex& index, const glyphset::GlyphDataset& dataset, const fs::path& dir) {
  if (dataset.font_ids() != index.font_ids() || dataset.charset() != index.glyphs.charset) {
    throw Error(ErrorCode::ShapeMismatch, "dataset does not match the index fonts and charset");
  }
  fs::create_directories(dir);
  const int size = dataset.size();
  const auto rel_root = dir.filename();
  index.previews.clear();
  for (std::size_t f = 0; f < dataset.num_fonts(); ++f) {
    const std::string& id = dataset.font_id(f);
    const auto cells = strip_cells(dataset, f);
    glyphset::GrayImage strip;
    strip.width = size * static_cast<int>(cells.size());
    strip.height = size;
    strip.pixels.assign(static_cast<std::size_t>(strip.width) * size, 255);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto bytes = glyphset::to_bytes(cells[i]);
      for (int r = 0; r < size; ++r) {
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(r) * size, size,
                    strip.pixels.begin() + static_cast<std::ptrdiff_t>(r) * strip.width +
                        static_cast<std::ptrdiff_t>(i) * size);
      }
    }
    glyphset::write_png(dir / (id + ".png"), strip);
    index.previews.push_back((rel_root / (id + ".png")).generic_string());

    fs::create_directories(dir / id);
    for (std::size_t c = 0; c < dataset.charset().size(); ++c) {
      glyphset::GrayImage g{size, size, glyphset::to_bytes(dataset.pixels(f, c))};
      glyphset::write_png(dir / id / (glyphset::codepoint_hex(dataset.charset()[c]) + ".png"), g);
    }
  }
}

}  // namespace glyphembed::index
