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
#include <vector>

namespace glyphembed::glyphset {

// One rasterized character in one font. Row-major, size x size, values in
// [0, 1] with 1.0 = white background and 0.0 = full ink.
struct GlyphImage {
  std::string font_id;
  char32_t codepoint = 0;
  int size = 0;
  std::vector<float> pixels;

  float at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * size + col]; }
  friend bool operator==(const GlyphImage&, const GlyphImage&) = default;
};

// 8-bit grayscale raster used for PNG interchange.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Decodes any PNG (palette, RGB, alpha, 16-bit) to 8-bit gray; transparent
// pixels are composited over white. Throws Error(ImageIo).
GrayImage decode_png(std::span<const std::uint8_t> bytes);
GrayImage read_png(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

// Conversions between the [0,1] float representation and 8-bit gray. Float to
// byte rounds to nearest; byte to float is exact division by 255.
std::vector<float> to_unit(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> to_bytes(std::span<const float> values);

// Bilinear resampling with pixel-center alignment and edge clamping.
std::vector<float> resize_bilinear(std::span<const float> src, int src_w, int src_h, int dst_w, int dst_h);

}  // namespace glyphembed::glyphset
