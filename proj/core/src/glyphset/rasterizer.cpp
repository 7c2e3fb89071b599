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

#include "glyphembed/glyphset/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphembed/error.hpp"

namespace glyphembed::glyphset {
namespace {

struct Line {
  Point a, b;
};

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Flattens the outline into line segments in font units. `scale` converts
// font units to output pixels and only controls subdivision density.
std::vector<Line> flatten(const GlyphOutline& outline, double scale, double flatness) {
  std::vector<Line> lines;
  for (const auto& contour : outline.contours) {
    for (const auto& s : contour) {
      switch (s.kind) {
        case Segment::Kind::Line:
          lines.push_back({s.p0, s.p1});
          break;
        case Segment::Kind::Quad: {
          const double dd = std::hypot(s.p0.x - 2 * s.c1.x + s.p1.x, s.p0.y - 2 * s.c1.y + s.p1.y) * scale;
          const int n = std::clamp(static_cast<int>(std::ceil(std::sqrt(dd / (4.0 * flatness)))), 1, 64);
          Point prev = s.p0;
          for (int i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            const double u = 1 - t;
            const Point p = i == n ? s.p1
                                   : Point{u * u * s.p0.x + 2 * u * t * s.c1.x + t * t * s.p1.x,
                                           u * u * s.p0.y + 2 * u * t * s.c1.y + t * t * s.p1.y};
            lines.push_back({prev, p});
            prev = p;
          }
          break;
        }
        case Segment::Kind::Cubic: {
          const double d1 = std::hypot(s.p0.x - 2 * s.c1.x + s.c2.x, s.p0.y - 2 * s.c1.y + s.c2.y);
          const double d2 = std::hypot(s.c1.x - 2 * s.c2.x + s.p1.x, s.c1.y - 2 * s.c2.y + s.p1.y);
          const double dd = std::max(d1, d2) * scale;
          const int n = std::clamp(static_cast<int>(std::ceil(std::sqrt(3.0 * dd / (4.0 * flatness)))), 1, 96);
          Point prev = s.p0;
          for (int i = 1; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            const double u = 1 - t;
            const Point p =
                i == n ? s.p1
                       : Point{u * u * u * s.p0.x + 3 * u * u * t * s.c1.x + 3 * u * t * t * s.c2.x + t * t * t * s.p1.x,
                               u * u * u * s.p0.y + 3 * u * u * t * s.c1.y + 3 * u * t * t * s.c2.y + t * t * t * s.p1.y};
            lines.push_back({prev, p});
            prev = p;
          }
          break;
        }
      }
    }
  }
  return lines;
}

// Signed-area accumulation: each edge deposits its exact trapezoidal coverage
// delta into the cells it crosses; a running sum along each row yields the
// winding-weighted coverage.
class Accumulator {
 public:
  Accumulator(int width, int height)
      : width_(width), height_(height), acc_(static_cast<std::size_t>(width) * height + width + 4, 0.0) {}

  void draw_line(Point p0, Point p1) {
    if (p0.y == p1.y) return;
    double dir = 1.0;
    if (p0.y > p1.y) {
      std::swap(p0, p1);
      dir = -1.0;
    }
    const double dxdy = (p1.x - p0.x) / (p1.y - p0.y);
    double x = p0.x;
    if (p0.y < 0) x -= p0.y * dxdy;
    const int y_start = std::max(0, static_cast<int>(std::floor(p0.y)));
    const int y_end = std::min(height_, static_cast<int>(std::ceil(p1.y)));
    for (int y = y_start; y < y_end; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * width_;
      const double dy = std::min(y + 1.0, p1.y) - std::max(static_cast<double>(y), p0.y);
      const double xnext = x + dxdy * dy;
      const double d = dy * dir;
      double x0 = std::clamp(std::min(x, xnext), 0.0, static_cast<double>(width_));
      double x1 = std::clamp(std::max(x, xnext), 0.0, static_cast<double>(width_));
      const double x0floor = std::floor(x0);
      const int x0i = static_cast<int>(x0floor);
      const double x1ceil = std::ceil(x1);
      const int x1i = static_cast<int>(x1ceil);
      if (x1i <= x0i + 1) {
        const double xmf = 0.5 * (x0 + x1) - x0floor;
        add(row + x0i, d - d * xmf);
        add(row + x0i + 1, d * xmf);
      } else {
        const double s = 1.0 / (x1 - x0);
        const double x0f = x0 - x0floor;
        const double a0 = 0.5 * s * (1.0 - x0f) * (1.0 - x0f);
        const double x1f = x1 - x1ceil + 1.0;
        const double am = 0.5 * s * x1f * x1f;
        add(row + x0i, d * a0);
        if (x1i == x0i + 2) {
          add(row + x0i + 1, d * (1.0 - a0 - am));
        } else {
          const double a1 = s * (1.5 - x0f);
          add(row + x0i + 1, d * (a1 - a0));
          for (int xi = x0i + 2; xi < x1i - 1; ++xi) add(row + xi, d * s);
          const double a2 = a1 + (x1i - x0i - 3) * s;
          add(row + x1i - 1, d * (1.0 - a2 - am));
        }
        add(row + x1i, d * am);
      }
      x = xnext;
    }
  }

  // Coverage in [0, 1] per pixel.
  std::vector<double> coverage() const {
    std::vector<double> out(static_cast<std::size_t>(width_) * height_);
    double running = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      running += acc_[i];
      out[i] = std::min(1.0, std::abs(running));
    }
    return out;
  }

 private:
  void add(std::size_t i, double v) { acc_[i] += v; }

  int width_;
  int height_;
  std::vector<double> acc_;
};

}  // namespace

std::vector<float> rasterize_outline(const GlyphOutline& outline, const RasterOptions& options) {
  if (options.size <= 0 || options.occupancy <= 0.0 || options.occupancy > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid raster options");
  }
  if (outline.empty()) throw Error(ErrorCode::BlankGlyph, "outline has no contours");

  // Provisional scale from the control-point hull; it bounds the curve extent.
  double hx0 = std::numeric_limits<double>::max(), hy0 = hx0, hx1 = -hx0, hy1 = -hx0;
  for (const auto& c : outline.contours) {
    for (const auto& s : c) {
      for (const Point& p : {s.p0, s.p1}) {
        hx0 = std::min(hx0, p.x);
        hx1 = std::max(hx1, p.x);
        hy0 = std::min(hy0, p.y);
        hy1 = std::max(hy1, p.y);
      }
    }
  }
  const double target = options.occupancy * options.size;
  const double hull_extent = std::max(hx1 - hx0, hy1 - hy0);
  const double provisional = hull_extent > 0 ? target / hull_extent : 1.0;

  const auto lines = flatten(outline, provisional, options.flatness);
  double x0 = std::numeric_limits<double>::max(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& l : lines) {
    for (const Point& p : {l.a, l.b}) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  const double extent = std::max(x1 - x0, y1 - y0);
  if (!(extent > 0)) throw Error(ErrorCode::BlankGlyph, "outline has zero extent");
  const double scale = target / extent;
  const double cx = 0.5 * (x0 + x1);
  const double cy = 0.5 * (y0 + y1);
  const double half = 0.5 * options.size;
  auto to_pixel = [&](Point p) { return Point{(p.x - cx) * scale + half, half - (p.y - cy) * scale}; };

  Accumulator acc(options.size, options.size);
  for (const auto& l : lines) {
    if (dist(l.a, l.b) == 0.0) continue;
    acc.draw_line(to_pixel(l.a), to_pixel(l.b));
  }
  const auto cov = acc.coverage();
  std::vector<float> pixels(cov.size());
  bool inked = false;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const long q = std::lround((1.0 - cov[i]) * 255.0);
    pixels[i] = static_cast<float>(q) / 255.0f;
    if (pixels[i] < 1.0f) inked = true;
  }
  if (!inked) throw Error(ErrorCode::BlankGlyph, "outline renders no ink");
  return pixels;
}

GlyphImage rasterize_glyph(const FontFile& font, const std::string& font_id, char32_t codepoint,
                           const RasterOptions& options) {
  GlyphImage img;
  img.font_id = font_id;
  img.codepoint = codepoint;
  img.size = options.size;
  img.pixels = rasterize_outline(font.outline(codepoint), options);
  return img;
}

GlyphImage rasterize_glyph(const FontSource& source, char32_t codepoint, int size) {
  if (source.kind != FontSource::Kind::FontFile) {
    throw Error(ErrorCode::InvalidArgument, "rasterize_glyph needs a font file source");
  }
  const FontFile font = FontFile::open(source.origin);
  RasterOptions options;
  options.size = size;
  return rasterize_glyph(font, source.font_id, codepoint, options);
}

}  // namespace glyphembed::glyphset
