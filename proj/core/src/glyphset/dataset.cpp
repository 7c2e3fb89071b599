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

#include "glyphembed/glyphset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <thread>

#include "glyphembed/error.hpp"

namespace glyphembed::glyphset {
namespace fs = std::filesystem;

GlyphDataset::GlyphDataset(CharSet charset, int size, std::vector<FontSource> fonts, std::vector<float> pixels,
                           std::vector<Exclusion> exclusions)
    : charset_(std::move(charset)),
      size_(size),
      fonts_(std::move(fonts)),
      pixels_(std::move(pixels)),
      exclusions_(std::move(exclusions)) {
  if (size_ <= 0) throw Error(ErrorCode::InvalidArgument, "dataset image size must be positive");
  if (pixels_.size() != num_images() * pixels_per_image()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset pixel buffer does not match fonts x charset x size^2");
  }
  std::set<std::string> seen;
  for (const auto& f : fonts_) {
    if (!seen.insert(f.font_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate font_id '" + f.font_id + "'");
    }
  }
}

std::vector<std::string> GlyphDataset::font_ids() const {
  std::vector<std::string> ids;
  ids.reserve(fonts_.size());
  for (const auto& f : fonts_) ids.push_back(f.font_id);
  return ids;
}

std::span<const float> GlyphDataset::pixels(std::size_t font, std::size_t char_index) const {
  if (font >= fonts_.size() || char_index >= charset_.size()) {
    throw Error(ErrorCode::InvalidArgument, "glyph index out of range");
  }
  const std::size_t offset = (font * charset_.size() + char_index) * pixels_per_image();
  return {pixels_.data() + offset, pixels_per_image()};
}

GlyphImage GlyphDataset::image(std::size_t font, std::size_t char_index) const {
  const auto px = pixels(font, char_index);
  return GlyphImage{fonts_[font].font_id, charset_[char_index], size_, {px.begin(), px.end()}};
}

std::size_t GlyphDataset::font_index(const std::string& font_id) const {
  for (std::size_t i = 0; i < fonts_.size(); ++i) {
    if (fonts_[i].font_id == font_id) return i;
  }
  throw Error(ErrorCode::UnknownFont, "no font '" + font_id + "' in dataset");
}

GlyphImage GlyphDataset::image(const std::string& font_id, char32_t codepoint) const {
  const auto ci = charset_.index_of(codepoint);
  if (!ci) throw Error(ErrorCode::UnknownCharacter, codepoint_label(codepoint) + " not in charset");
  return image(font_index(font_id), *ci);
}

GlyphDataset GlyphDataset::subset_fonts(std::span<const std::size_t> font_indices) const {
  std::vector<FontSource> fonts;
  std::vector<float> px;
  px.reserve(font_indices.size() * charset_.size() * pixels_per_image());
  for (const auto fi : font_indices) {
    if (fi >= fonts_.size()) throw Error(ErrorCode::InvalidArgument, "font index out of range");
    fonts.push_back(fonts_[fi]);
    const auto begin = pixels_.begin() + static_cast<std::ptrdiff_t>(fi * charset_.size() * pixels_per_image());
    px.insert(px.end(), begin, begin + static_cast<std::ptrdiff_t>(charset_.size() * pixels_per_image()));
  }
  return GlyphDataset(charset_, size_, std::move(fonts), std::move(px), exclusions_);
}

GlyphDataset GlyphDataset::restrict_charset(const CharSet& sub) const {
  std::vector<std::size_t> map;
  for (const auto cp : sub.codepoints()) {
    const auto ci = charset_.index_of(cp);
    if (!ci) throw Error(ErrorCode::InvalidCharset, codepoint_label(cp) + " not in dataset charset");
    map.push_back(*ci);
  }
  std::vector<float> px;
  px.reserve(fonts_.size() * sub.size() * pixels_per_image());
  for (std::size_t f = 0; f < fonts_.size(); ++f) {
    for (const auto ci : map) {
      const auto p = pixels(f, ci);
      px.insert(px.end(), p.begin(), p.end());
    }
  }
  return GlyphDataset(sub, size_, fonts_, std::move(px), exclusions_);
}

nlohmann::json GlyphDataset::manifest() const {
  nlohmann::json j;
  j["charset"] = charset_.id();
  std::vector<std::string> cps;
  for (const auto cp : charset_.codepoints()) cps.push_back(codepoint_hex(cp));
  j["codepoints"] = cps;
  j["size"] = size_;
  j["font_ids"] = font_ids();
  auto ex = nlohmann::json::array();
  for (const auto& e : exclusions_) {
    ex.push_back({{"font_id", e.font_id},
                  {"codepoint", e.codepoint ? codepoint_label(e.codepoint) : std::string()},
                  {"reason", e.reason}});
  }
  j["exclusions"] = ex;
  return j;
}

namespace {

bool is_font_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ttf" || ext == ".otf" || ext == ".ttc";
}

struct FontLoad {
  std::vector<float> pixels;
  std::optional<Exclusion> failure;
};

FontLoad load_font(const FontSource& src, const CharSet& charset, int size) {
  FontLoad result;
  const std::size_t per = static_cast<std::size_t>(size) * size;
  result.pixels.reserve(per * charset.size());
  char32_t current = 0;
  try {
    if (src.kind == FontSource::Kind::FontFile) {
      const FontFile font = FontFile::open(src.origin);
      RasterOptions options;
      options.size = size;
      for (const auto cp : charset.codepoints()) {
        current = cp;
        const auto img = rasterize_glyph(font, src.font_id, cp, options);
        result.pixels.insert(result.pixels.end(), img.pixels.begin(), img.pixels.end());
      }
    } else {
      for (const auto cp : charset.codepoints()) {
        current = cp;
        const fs::path file = src.origin / (codepoint_hex(cp) + ".png");
        if (!fs::exists(file)) throw Error(ErrorCode::MissingGlyph, file.filename().string() + " not found");
        const GrayImage gray = read_png(file);
        auto px = to_unit(gray.pixels);
        if (gray.width != size || gray.height != size) px = resize_bilinear(px, gray.width, gray.height, size, size);
        if (std::none_of(px.begin(), px.end(), [](float v) { return v < 1.0f; })) {
          throw Error(ErrorCode::BlankGlyph, file.filename().string() + " has no ink");
        }
        result.pixels.insert(result.pixels.end(), px.begin(), px.end());
      }
    }
  } catch (const Error& e) {
    const bool whole_font = e.code() == ErrorCode::UnreadableFont;
    result.failure = Exclusion{src.font_id, whole_font ? char32_t{0} : current, std::string(to_string(e.code()))};
    result.pixels.clear();
  }
  return result;
}

}  // namespace

GlyphDataset load_dataset(const fs::path& root, const CharSet& charset, int size) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::EmptyDataset, root.string() + " is not a directory");
  std::map<std::string, FontSource> files, dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && is_font_file(p)) {
      files[p.stem().string()] = FontSource{p.stem().string(), FontSource::Kind::FontFile, p};
    } else if (entry.is_directory()) {
      dirs[p.filename().string()] = FontSource{p.filename().string(), FontSource::Kind::ImageDir, p};
    }
  }
  for (const auto& [id, src] : files) {
    if (dirs.count(id)) {
      throw Error(ErrorCode::MixedLayout, "font_id '" + id + "' exists both as a font file and an image directory");
    }
  }
  std::vector<FontSource> sources;
  for (auto& [id, src] : files) sources.push_back(src);
  for (auto& [id, src] : dirs) sources.push_back(src);
  std::sort(sources.begin(), sources.end(),
            [](const FontSource& a, const FontSource& b) { return a.font_id < b.font_id; });

  std::vector<FontLoad> loads(sources.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), sources.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < sources.size(); i += workers) loads[i] = load_font(sources[i], charset, size);
      });
    }
  }

  std::vector<FontSource> kept;
  std::vector<float> pixels;
  std::vector<Exclusion> exclusions;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (loads[i].failure) {
      exclusions.push_back(*loads[i].failure);
      continue;
    }
    kept.push_back(sources[i]);
    pixels.insert(pixels.end(), loads[i].pixels.begin(), loads[i].pixels.end());
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyDataset, "no usable font under " + root.string());
  return GlyphDataset(charset, size, std::move(kept), std::move(pixels), std::move(exclusions));
}

void write_rendered(const GlyphDataset& dataset, const fs::path& out) {
  fs::create_directories(out);
  for (std::size_t f = 0; f < dataset.num_fonts(); ++f) {
    const fs::path dir = out / dataset.font_id(f);
    fs::create_directories(dir);
    for (std::size_t c = 0; c < dataset.charset().size(); ++c) {
      GrayImage gray{dataset.size(), dataset.size(), to_bytes(dataset.pixels(f, c))};
      write_png(dir / (codepoint_hex(dataset.charset()[c]) + ".png"), gray);
    }
  }
  std::ofstream manifest(out / "manifest.json");
  manifest << dataset.manifest().dump(2) << '\n';
}

FontPartition partition_fonts(std::span<const std::string> font_ids, const SplitSpec& spec) {
  if (spec.n_val_fonts == 0 || spec.n_val_fonts >= font_ids.size()) {
    throw Error(ErrorCode::InvalidSplit, "need 0 < n_val_fonts < number of fonts (" +
                                             std::to_string(spec.n_val_fonts) + " of " +
                                             std::to_string(font_ids.size()) + ")");
  }
  std::vector<std::size_t> order(font_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return font_ids[a] < font_ids[b]; });
  Rng rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }
  FontPartition part;
  part.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.n_val_fonts));
  part.train.assign(order.begin() + static_cast<std::ptrdiff_t>(spec.n_val_fonts), order.end());
  std::sort(part.val.begin(), part.val.end());
  std::sort(part.train.begin(), part.train.end());
  return part;
}

std::pair<GlyphDataset, GlyphDataset> split_fonts(const GlyphDataset& dataset, const SplitSpec& spec) {
  const auto ids = dataset.font_ids();
  const auto part = partition_fonts(ids, spec);
  return {dataset.subset_fonts(part.train), dataset.subset_fonts(part.val)};
}

MinibatchDraw sample_minibatch(const GlyphDataset& train, std::size_t n_fonts, Rng& rng) {
  const std::size_t n_chars = train.charset().size();
  if (n_fonts == 0 || n_fonts > train.num_fonts() || n_chars < 2) {
    throw Error(ErrorCode::DatasetTooSmall, "cannot draw " + std::to_string(n_fonts) + " fonts x 2 glyphs from " +
                                                std::to_string(train.num_fonts()) + " fonts x " +
                                                std::to_string(n_chars) + " chars");
  }
  std::vector<std::size_t> pool(train.num_fonts());
  std::iota(pool.begin(), pool.end(), 0);
  MinibatchDraw draw;
  draw.entries.reserve(n_fonts);
  draw.images.reserve(2 * n_fonts);
  for (std::size_t i = 0; i < n_fonts; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    const std::size_t font = pool[i];
    const std::size_t c1 = rng.uniform_index(n_chars);
    std::size_t c2 = rng.uniform_index(n_chars - 1);
    if (c2 >= c1) ++c2;
    MinibatchEntry e{font, train.font_id(font), c1, c2, train.charset()[c1], train.charset()[c2]};
    draw.images.push_back(train.image(font, c1));
    draw.images.push_back(train.image(font, c2));
    draw.entries.push_back(std::move(e));
  }
  return draw;
}

GlyphImage random_resized_crop(const GlyphImage& g, Rng& rng, const CropParams& params) {
  const int n = g.size;
  const double area = static_cast<double>(n) * n;
  double w = n, h = n, x0 = 0, y0 = 0;
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(params.scale_lo, params.scale_hi);
    const double ratio = std::exp(rng.uniform(std::log(params.aspect_lo), std::log(params.aspect_hi)));
    const double cw = std::sqrt(target * ratio);
    const double ch = std::sqrt(target / ratio);
    if (cw <= n && ch <= n) {
      w = cw;
      h = ch;
      x0 = rng.uniform(0.0, n - cw);
      y0 = rng.uniform(0.0, n - ch);
      break;
    }
  }
  GlyphImage out = g;
  for (int y = 0; y < n; ++y) {
    const double sy = std::clamp(y0 + (y + 0.5) * h / n - 0.5, 0.0, n - 1.0);
    const int r0 = static_cast<int>(std::floor(sy));
    const int r1 = std::min(r0 + 1, n - 1);
    const double wy = sy - r0;
    for (int x = 0; x < n; ++x) {
      const double sx = std::clamp(x0 + (x + 0.5) * w / n - 0.5, 0.0, n - 1.0);
      const int c0 = static_cast<int>(std::floor(sx));
      const int c1 = std::min(c0 + 1, n - 1);
      const double wx = sx - c0;
      const double top = g.at(r0, c0) * (1 - wx) + g.at(r0, c1) * wx;
      const double bot = g.at(r1, c0) * (1 - wx) + g.at(r1, c1) * wx;
      const double v = top * (1 - wy) + bot * wy;
      out.pixels[static_cast<std::size_t>(y) * n + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace glyphembed::glyphset
