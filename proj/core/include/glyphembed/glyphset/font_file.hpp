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
#include <memory>
#include <optional>
#include <vector>

namespace glyphembed::glyphset {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// One outline segment in font units (y up). Quadratic segments use c1 only;
// cubic segments use c1 and c2; lines use neither.
struct Segment {
  enum class Kind { Line, Quad, Cubic };
  Kind kind = Kind::Line;
  Point p0, c1, c2, p1;
};

struct GlyphOutline {
  std::vector<std::vector<Segment>> contours;

  bool empty() const noexcept {
    for (const auto& c : contours) {
      if (!c.empty()) return false;
    }
    return true;
  }
};

// Read-only view of an sfnt font (TrueType `glyf` or CFF outlines).
//
// Supported tables: head, maxp, cmap (formats 0, 4, 6, 12), loca/glyf with
// composite glyphs, and CFF with Type 2 charstrings (name-keyed or CID-keyed).
// Hinting instructions are ignored. Collections (.ttc) expose their first face.
class FontFile {
 public:
  // Throws Error(UnreadableFont) if the bytes are not a parseable font.
  static FontFile open(const std::filesystem::path& path);
  static FontFile from_bytes(std::vector<std::uint8_t> bytes);

  FontFile(FontFile&&) noexcept;
  FontFile& operator=(FontFile&&) noexcept;
  ~FontFile();

  int units_per_em() const noexcept;
  std::size_t num_glyphs() const noexcept;
  bool has_cff_outlines() const noexcept;

  // Glyph id for a codepoint, or nullopt when the cmap maps it to .notdef.
  std::optional<std::uint16_t> glyph_index(char32_t codepoint) const;

  // Outline in font units. Throws MissingGlyph if the codepoint is unmapped.
  GlyphOutline outline(char32_t codepoint) const;
  GlyphOutline outline_by_index(std::uint16_t glyph) const;

 private:
  struct Impl;
  explicit FontFile(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace glyphembed::glyphset
