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

#include <filesystem>
#include <string>
#include <vector>

#include "glyphembed/glyphset/font_file.hpp"
#include "glyphembed/glyphset/image.hpp"

namespace glyphembed::glyphset {

struct RasterOptions {
  int size = 64;
  // Fraction of the canvas spanned by the longer side of the ink bounding box.
  double occupancy = 0.8;
  // Maximum chord deviation when flattening curves, in output pixels.
  double flatness = 0.05;
};

// Where a dataset font comes from: a vector font file or a directory of
// pre-rendered `<hex codepoint>.png` images.
struct FontSource {
  enum class Kind { FontFile, ImageDir };
  std::string font_id;
  Kind kind = Kind::FontFile;
  std::filesystem::path origin;
};

// Anti-aliased coverage raster of an outline, dark ink on white. The outline is
// uniformly scaled so its tight bounding box's longer side spans
// occupancy*size pixels, then centered on the canvas by bounding-box midpoint.
// Pixel values are quantized to multiples of 1/255 so that rendering and
// re-reading a PNG produce identical images.
//
// Throws Error(BlankGlyph) if the outline is empty or leaves every pixel white.
std::vector<float> rasterize_outline(const GlyphOutline& outline, const RasterOptions& options = {});

// Rasterizes one codepoint from a font file. Errors: MissingGlyph,
// UnreadableFont, BlankGlyph.
GlyphImage rasterize_glyph(const FontFile& font, const std::string& font_id, char32_t codepoint,
                           const RasterOptions& options = {});
GlyphImage rasterize_glyph(const FontSource& source, char32_t codepoint, int size);

}  // namespace glyphembed::glyphset
