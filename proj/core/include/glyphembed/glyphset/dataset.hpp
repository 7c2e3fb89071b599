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
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/glyphset/charset.hpp"
#include "glyphembed/glyphset/image.hpp"
#include "glyphembed/glyphset/rasterizer.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::glyphset {

struct Exclusion {
  std::string font_id;
  char32_t codepoint = 0;  // 0 when the whole font failed to open
  std::string reason;
};

// Fonts x characters image corpus. Complete by construction: every retained
// font has an image for every codepoint of the charset. Immutable once built;
// images are stored contiguously as [font][char][row][col].
class GlyphDataset {
 public:
  GlyphDataset(CharSet charset, int size, std::vector<FontSource> fonts, std::vector<float> pixels,
               std::vector<Exclusion> exclusions = {});

  const CharSet& charset() const noexcept { return charset_; }
  int size() const noexcept { return size_; }
  std::size_t num_fonts() const noexcept { return fonts_.size(); }
  std::size_t num_images() const noexcept { return fonts_.size() * charset_.size(); }
  const std::vector<FontSource>& fonts() const noexcept { return fonts_; }
  const std::string& font_id(std::size_t font) const { return fonts_.at(font).font_id; }
  std::vector<std::string> font_ids() const;
  const std::vector<Exclusion>& exclusions() const noexcept { return exclusions_; }

  std::size_t pixels_per_image() const noexcept { return static_cast<std::size_t>(size_) * size_; }
  std::span<const float> pixels(std::size_t font, std::size_t char_index) const;
  GlyphImage image(std::size_t font, std::size_t char_index) const;
  // Looks up by (font_id, codepoint). Throws UnknownFont / UnknownCharacter.
  GlyphImage image(const std::string& font_id, char32_t codepoint) const;
  std::size_t font_index(const std::string& font_id) const;

  // New dataset with the given fonts (by index, in the given order).
  GlyphDataset subset_fonts(std::span<const std::size_t> font_indices) const;
  // New dataset restricted to a sub-charset (must be contained in this one).
  GlyphDataset restrict_charset(const CharSet& sub) const;

  nlohmann::json manifest() const;

 private:
  CharSet charset_;
  int size_;
  std::vector<FontSource> fonts_;
  std::vector<float> pixels_;
  std::vector<Exclusion> exclusions_;
};

// Loads a dataset directory. The root may hold vector font files (*.ttf,
// *.otf, *.ttc; font_id = file stem) and/or pre-rendered font directories
// (`<font_id>/<hex codepoint>.png`). Fonts are ordered by font_id. Fonts
// lacking any glyph of the charset are excluded and reported.
//
// Errors: EmptyDataset, MixedLayout (same font_id as both file and directory).
GlyphDataset load_dataset(const std::filesystem::path& root, const CharSet& charset, int size = 64);

// Writes `<out>/<font_id>/<hex>.png` for every image, plus manifest.json.
void write_rendered(const GlyphDataset& dataset, const std::filesystem::path& out);

struct SplitSpec {
  std::uint64_t seed = 0;
  std::size_t n_val_fonts = 0;
};

struct FontPartition {
  std::vector<std::size_t> train;  // ascending indices into the sorted id list
  std::vector<std::size_t> val;
};

// Pure function of (sorted font ids, seed). Errors: InvalidSplit.
FontPartition partition_fonts(std::span<const std::string> font_ids, const SplitSpec& spec);

std::pair<GlyphDataset, GlyphDataset> split_fonts(const GlyphDataset& dataset, const SplitSpec& spec);

struct MinibatchEntry {
  std::size_t font = 0;  // index into the dataset
  std::string font_id;
  std::size_t char_1 = 0;  // indices into the charset
  std::size_t char_2 = 0;
  char32_t codepoint_1 = 0;
  char32_t codepoint_2 = 0;
};

// N fonts x 2 glyphs. images[2n] and images[2n+1] belong to entries[n].
struct MinibatchDraw {
  std::vector<MinibatchEntry> entries;
  std::vector<GlyphImage> images;
};

// Samples n_fonts distinct fonts uniformly, and for each two distinct
// characters uniformly. Errors: DatasetTooSmall.
MinibatchDraw sample_minibatch(const GlyphDataset& train, std::size_t n_fonts, Rng& rng);

struct CropParams {
  double scale_lo = 0.8;
  double scale_hi = 1.0;
  double aspect_lo = 0.9;
  double aspect_hi = 1.1;
};

// Random sub-rectangle with area fraction in [scale_lo, scale_hi] and aspect
// ratio (log-uniform) in [aspect_lo, aspect_hi], resampled bilinearly back to
// the original size. Output clamped to [0, 1].
GlyphImage random_resized_crop(const GlyphImage& g, Rng& rng, const CropParams& params = {});

}  // namespace glyphembed::glyphset
