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

#include "glyphembed/glyphset/font_file.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <string>

#include "glyphembed/error.hpp"

namespace glyphembed::glyphset {
namespace {

[[noreturn]] void unreadable(const std::string& what) {
  throw Error(ErrorCode::UnreadableFont, what);
}

// Bounds-checked big-endian reader over a byte span.
class Reader {
 public:
  Reader() = default;
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t size() const { return data_.size(); }

  std::uint8_t u8(std::size_t at) const {
    check(at, 1);
    return data_[at];
  }
  std::uint16_t u16(std::size_t at) const {
    check(at, 2);
    return static_cast<std::uint16_t>((data_[at] << 8) | data_[at + 1]);
  }
  std::int16_t i16(std::size_t at) const { return static_cast<std::int16_t>(u16(at)); }
  std::uint32_t u24(std::size_t at) const {
    check(at, 3);
    return (std::uint32_t{data_[at]} << 16) | (std::uint32_t{data_[at + 1]} << 8) | data_[at + 2];
  }
  std::uint32_t u32(std::size_t at) const {
    check(at, 4);
    return (std::uint32_t{data_[at]} << 24) | (std::uint32_t{data_[at + 1]} << 16) |
           (std::uint32_t{data_[at + 2]} << 8) | data_[at + 3];
  }
  std::uint32_t offset(std::size_t at, int width) const {
    switch (width) {
      case 1: return u8(at);
      case 2: return u16(at);
      case 3: return u24(at);
      case 4: return u32(at);
      default: unreadable("invalid offset size " + std::to_string(width));
    }
  }
  Reader sub(std::size_t at, std::size_t len) const {
    check(at, len);
    return Reader(data_.subspan(at, len));
  }
  std::span<const std::uint8_t> bytes() const { return data_; }

 private:
  void check(std::size_t at, std::size_t len) const {
    if (at > data_.size() || len > data_.size() - at) unreadable("read past end of table");
  }
  std::span<const std::uint8_t> data_;
};

std::uint32_t tag(const char (&t)[5]) {
  return (std::uint32_t(std::uint8_t(t[0])) << 24) | (std::uint32_t(std::uint8_t(t[1])) << 16) |
         (std::uint32_t(std::uint8_t(t[2])) << 8) | std::uint32_t(std::uint8_t(t[3]));
}

// ---------------------------------------------------------------------------
// cmap

struct CmapSubtable {
  Reader table;
  std::uint16_t format = 0;
};

std::optional<std::uint16_t> cmap_lookup(const CmapSubtable& sub, char32_t cp) {
  const Reader& r = sub.table;
  switch (sub.format) {
    case 0: {
      if (cp > 255) return std::nullopt;
      const auto g = r.u8(6 + cp);
      return g ? std::optional<std::uint16_t>(g) : std::nullopt;
    }
    case 4: {
      if (cp > 0xFFFF) return std::nullopt;
      const std::size_t seg_count = r.u16(6) / 2;
      const std::size_t ends = 14;
      const std::size_t starts = ends + 2 * seg_count + 2;
      const std::size_t deltas = starts + 2 * seg_count;
      const std::size_t ranges = deltas + 2 * seg_count;
      // Binary search on endCode.
      std::size_t lo = 0, hi = seg_count;
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (r.u16(ends + 2 * mid) < cp) lo = mid + 1;
        else hi = mid;
      }
      if (lo >= seg_count) return std::nullopt;
      const std::uint16_t start = r.u16(starts + 2 * lo);
      if (cp < start) return std::nullopt;
      const std::uint16_t delta = r.u16(deltas + 2 * lo);
      const std::uint16_t range_offset = r.u16(ranges + 2 * lo);
      std::uint16_t g = 0;
      if (range_offset == 0) {
        g = static_cast<std::uint16_t>(cp + delta);
      } else {
        const std::size_t at = ranges + 2 * lo + range_offset + 2 * (cp - start);
        g = r.u16(at);
        if (g != 0) g = static_cast<std::uint16_t>(g + delta);
      }
      return g ? std::optional<std::uint16_t>(g) : std::nullopt;
    }
    case 6: {
      const std::uint16_t first = r.u16(6);
      const std::uint16_t count = r.u16(8);
      if (cp < first || cp >= char32_t(first) + count) return std::nullopt;
      const auto g = r.u16(10 + 2 * (cp - first));
      return g ? std::optional<std::uint16_t>(g) : std::nullopt;
    }
    case 12: {
      const std::uint32_t groups = r.u32(12);
      std::uint32_t lo = 0, hi = groups;
      while (lo < hi) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        const std::size_t at = 16 + 12 * std::size_t{mid};
        const std::uint32_t start = r.u32(at);
        const std::uint32_t end = r.u32(at + 4);
        if (cp < start) {
          hi = mid;
        } else if (cp > end) {
          lo = mid + 1;
        } else {
          const std::uint32_t g = r.u32(at + 8) + (cp - start);
          if (g == 0 || g > 0xFFFF) return std::nullopt;
          return static_cast<std::uint16_t>(g);
        }
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

CmapSubtable choose_cmap(const Reader& cmap) {
  const std::uint16_t n = cmap.u16(2);
  int best_rank = -1;
  CmapSubtable best;
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t rec = 4 + 8 * std::size_t{i};
    const std::uint16_t platform = cmap.u16(rec);
    const std::uint16_t encoding = cmap.u16(rec + 2);
    const std::uint32_t off = cmap.u32(rec + 4);
    const std::uint16_t format = cmap.u16(off);
    std::size_t length = 0;
    if (format == 12) length = cmap.u32(off + 4);
    else length = cmap.u16(off + 2);
    if (format != 0 && format != 4 && format != 6 && format != 12) continue;
    int rank = -1;
    const bool unicode = platform == 0 || (platform == 3 && (encoding == 1 || encoding == 10));
    const bool symbol = platform == 3 && encoding == 0;
    const bool mac_roman = platform == 1 && encoding == 0;
    if (unicode) rank = format == 12 ? 4 : 3;
    else if (symbol) rank = 2;
    else if (mac_roman) rank = 1;
    if (rank > best_rank) {
      best_rank = rank;
      best.table = cmap.sub(off, std::min<std::size_t>(length, cmap.size() - off));
      best.format = format;
    }
  }
  if (best_rank < 0) unreadable("no usable cmap subtable");
  return best;
}

// ---------------------------------------------------------------------------
// TrueType glyf outlines

struct RawPoint {
  double x, y;
  bool on;
};

void append_contour(const std::vector<RawPoint>& pts, GlyphOutline& out) {
  const std::size_t n = pts.size();
  if (n < 2) return;
  // Find a starting on-curve point; synthesize one if the contour has none.
  std::size_t first_on = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].on) {
      first_on = i;
      break;
    }
  }
  std::vector<RawPoint> ring;
  ring.reserve(n + 1);
  if (first_on == n) {
    ring.push_back({(pts[0].x + pts[1].x) / 2, (pts[0].y + pts[1].y) / 2, true});
    for (std::size_t i = 1; i <= n; ++i) ring.push_back(pts[i % n]);
  } else {
    for (std::size_t i = 0; i < n; ++i) ring.push_back(pts[(first_on + i) % n]);
  }
  const Point start{ring[0].x, ring[0].y};
  std::vector<Segment> segs;
  Point cur = start;
  std::optional<Point> ctrl;
  auto emit_to = [&](Point p) {
    if (ctrl) segs.push_back({Segment::Kind::Quad, cur, *ctrl, {}, p});
    else segs.push_back({Segment::Kind::Line, cur, {}, {}, p});
    cur = p;
    ctrl.reset();
  };
  for (std::size_t i = 1; i < ring.size(); ++i) {
    const RawPoint& rp = ring[i];
    const Point p{rp.x, rp.y};
    if (rp.on) {
      emit_to(p);
    } else if (ctrl) {
      emit_to({(ctrl->x + p.x) / 2, (ctrl->y + p.y) / 2});
      ctrl = p;
    } else {
      ctrl = p;
    }
  }
  emit_to(start);
  out.contours.push_back(std::move(segs));
}

struct Affine {
  double a = 1, b = 0, c = 0, d = 1, dx = 0, dy = 0;
  Point apply(double x, double y) const { return {a * x + c * y + dx, b * x + d * y + dy}; }
};

// ---------------------------------------------------------------------------
// CFF

struct CffIndex {
  Reader data;  // whole CFF table
  std::vector<std::uint32_t> offsets;  // absolute offsets into data, count+1 entries
  std::size_t end = 0;  // first byte after the INDEX

  std::size_t count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  Reader item(std::size_t i) const {
    if (i >= count()) unreadable("CFF INDEX item out of range");
    if (offsets[i + 1] < offsets[i]) unreadable("CFF INDEX offsets decrease");
    return data.sub(offsets[i], offsets[i + 1] - offsets[i]);
  }
};

CffIndex read_index(const Reader& cff, std::size_t at) {
  CffIndex idx;
  idx.data = cff;
  const std::uint16_t count = cff.u16(at);
  if (count == 0) {
    idx.end = at + 2;
    return idx;
  }
  const int off_size = cff.u8(at + 2);
  if (off_size < 1 || off_size > 4) unreadable("bad CFF offSize");
  const std::size_t base = at + 3 + std::size_t(count + 1) * off_size - 1;
  idx.offsets.resize(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    idx.offsets[i] = static_cast<std::uint32_t>(base + cff.offset(at + 3 + i * off_size, off_size));
  }
  idx.end = idx.offsets.back();
  if (idx.end > cff.size()) unreadable("CFF INDEX extends past table");
  return idx;
}

using CffDict = std::map<int, std::vector<double>>;

CffDict parse_dict(const Reader& r) {
  CffDict dict;
  std::vector<double> operands;
  std::size_t i = 0;
  const std::size_t n = r.size();
  while (i < n) {
    const int b0 = r.u8(i);
    if (b0 <= 21) {
      int op = b0;
      ++i;
      if (b0 == 12) {
        op = 1200 + r.u8(i);
        ++i;
      }
      dict[op] = operands;
      operands.clear();
    } else if (b0 == 28) {
      operands.push_back(static_cast<std::int16_t>(r.u16(i + 1)));
      i += 3;
    } else if (b0 == 29) {
      operands.push_back(static_cast<std::int32_t>(r.u32(i + 1)));
      i += 5;
    } else if (b0 == 30) {
      // Real number encoded as nibbles.
      std::string text;
      ++i;
      bool done = false;
      while (!done) {
        const int byte = r.u8(i++);
        for (int nib : {byte >> 4, byte & 0xF}) {
          if (nib <= 9) text += static_cast<char>('0' + nib);
          else if (nib == 0xA) text += '.';
          else if (nib == 0xB) text += 'E';
          else if (nib == 0xC) text += "E-";
          else if (nib == 0xE) text += '-';
          else if (nib == 0xF) {
            done = true;
            break;
          }
        }
      }
      operands.push_back(text.empty() ? 0.0 : std::strtod(text.c_str(), nullptr));
    } else if (b0 >= 32 && b0 <= 246) {
      operands.push_back(b0 - 139);
      ++i;
    } else if (b0 >= 247 && b0 <= 250) {
      operands.push_back((b0 - 247) * 256 + r.u8(i + 1) + 108);
      i += 2;
    } else if (b0 >= 251 && b0 <= 254) {
      operands.push_back(-(b0 - 251) * 256 - r.u8(i + 1) - 108);
      i += 2;
    } else {
      unreadable("bad CFF DICT byte");
    }
  }
  return dict;
}

int subr_bias(std::size_t count) {
  if (count < 1240) return 107;
  if (count < 33900) return 1131;
  return 32768;
}

struct CffFont {
  Reader table;
  CffIndex global_subrs;
  CffIndex charstrings;
  std::vector<CffIndex> local_subrs;  // one per FD (size 1 when not CID-keyed)
  Reader fd_select;
  bool cid = false;

  std::size_t fd_for(std::uint16_t glyph) const {
    if (!cid) return 0;
    const int format = fd_select.u8(0);
    if (format == 0) return fd_select.u8(1 + glyph);
    if (format == 3) {
      const std::uint16_t ranges = fd_select.u16(1);
      for (std::uint16_t i = 0; i < ranges; ++i) {
        const std::size_t at = 3 + 3 * std::size_t{i};
        const std::uint16_t first = fd_select.u16(at);
        const std::uint16_t next = fd_select.u16(at + 3);
        if (glyph >= first && glyph < next) return fd_select.u8(at + 2);
      }
    }
    unreadable("glyph not covered by FDSelect");
  }
};

CffIndex local_subrs_for(const Reader& cff, const CffDict& font_dict) {
  const auto priv = font_dict.find(18);
  if (priv == font_dict.end() || priv->second.size() != 2) return {};
  const auto size = static_cast<std::size_t>(priv->second[0]);
  const auto off = static_cast<std::size_t>(priv->second[1]);
  const CffDict pdict = parse_dict(cff.sub(off, size));
  const auto subrs = pdict.find(19);
  if (subrs == pdict.end() || subrs->second.empty()) return {};
  return read_index(cff, off + static_cast<std::size_t>(subrs->second[0]));
}

CffFont parse_cff(const Reader& cff) {
  CffFont font;
  font.table = cff;
  const int hdr_size = cff.u8(2);
  const CffIndex names = read_index(cff, hdr_size);
  const CffIndex top_dicts = read_index(cff, names.end);
  const CffIndex strings = read_index(cff, top_dicts.end);
  font.global_subrs = read_index(cff, strings.end);
  if (top_dicts.count() == 0) unreadable("CFF has no Top DICT");
  const CffDict top = parse_dict(top_dicts.item(0));
  if (auto t = top.find(1206); t != top.end() && !t->second.empty() && t->second[0] != 2) {
    unreadable("only Type 2 charstrings are supported");
  }
  const auto cs = top.find(17);
  if (cs == top.end() || cs->second.empty()) unreadable("CFF without CharStrings");
  font.charstrings = read_index(cff, static_cast<std::size_t>(cs->second[0]));
  const auto fd_array = top.find(1236);
  const auto fd_select = top.find(1237);
  if (fd_array != top.end() && fd_select != top.end() && !fd_array->second.empty() &&
      !fd_select->second.empty()) {
    font.cid = true;
    const CffIndex fds = read_index(cff, static_cast<std::size_t>(fd_array->second[0]));
    for (std::size_t i = 0; i < fds.count(); ++i) {
      font.local_subrs.push_back(local_subrs_for(cff, parse_dict(fds.item(i))));
    }
    const auto sel = static_cast<std::size_t>(fd_select->second[0]);
    font.fd_select = cff.sub(sel, cff.size() - sel);
  } else {
    font.local_subrs.push_back(local_subrs_for(cff, top));
  }
  return font;
}

// Type 2 charstring interpreter producing cubic outlines.
class CharstringBuilder {
 public:
  CharstringBuilder(const CffFont& font, std::size_t fd) : font_(font), fd_(fd) {}

  GlyphOutline run(const Reader& cs) {
    execute(cs, 0);
    close_contour();
    return std::move(out_);
  }

 private:
  void execute(const Reader& cs, int depth) {
    if (depth > 10) unreadable("charstring subroutine nesting too deep");
    std::size_t i = 0;
    const std::size_t n = cs.size();
    while (i < n) {
      const int b0 = cs.u8(i);
      if (b0 >= 32 || b0 == 28) {
        if (b0 == 28) {
          push(static_cast<std::int16_t>(cs.u16(i + 1)));
          i += 3;
        } else if (b0 <= 246) {
          push(b0 - 139);
          ++i;
        } else if (b0 <= 250) {
          push((b0 - 247) * 256 + cs.u8(i + 1) + 108);
          i += 2;
        } else if (b0 <= 254) {
          push(-(b0 - 251) * 256 - cs.u8(i + 1) - 108);
          i += 2;
        } else {
          push(static_cast<std::int32_t>(cs.u32(i + 1)) / 65536.0);
          i += 5;
        }
        continue;
      }
      ++i;
      switch (b0) {
        case 1:   // hstem
        case 3:   // vstem
        case 18:  // hstemhm
        case 23:  // vstemhm
          take_width(stack_.size() % 2 == 1);
          stems_ += static_cast<int>(stack_.size() / 2);
          stack_.clear();
          break;
        case 19:  // hintmask
        case 20:  // cntrmask
          take_width(stack_.size() % 2 == 1);
          stems_ += static_cast<int>(stack_.size() / 2);
          stack_.clear();
          i += static_cast<std::size_t>((stems_ + 7) / 8);
          break;
        case 21:  // rmoveto
          take_width(stack_.size() > 2);
          need(2);
          move_to(x_ + arg(0), y_ + arg(1));
          break;
        case 22:  // hmoveto
          take_width(stack_.size() > 1);
          need(1);
          move_to(x_ + arg(0), y_);
          break;
        case 4:  // vmoveto
          take_width(stack_.size() > 1);
          need(1);
          move_to(x_, y_ + arg(0));
          break;
        case 5:  // rlineto
          for (std::size_t k = 0; k + 1 < stack_.size(); k += 2) line_to(x_ + stack_[k], y_ + stack_[k + 1]);
          stack_.clear();
          break;
        case 6:  // hlineto
        case 7:  // vlineto
        {
          bool horizontal = b0 == 6;
          for (double v : stack_) {
            if (horizontal) line_to(x_ + v, y_);
            else line_to(x_, y_ + v);
            horizontal = !horizontal;
          }
          stack_.clear();
          break;
        }
        case 8:  // rrcurveto
          for (std::size_t k = 0; k + 5 < stack_.size(); k += 6) {
            rcurve(stack_[k], stack_[k + 1], stack_[k + 2], stack_[k + 3], stack_[k + 4], stack_[k + 5]);
          }
          stack_.clear();
          break;
        case 24:  // rcurveline
        {
          std::size_t k = 0;
          for (; k + 7 < stack_.size(); k += 6) {
            rcurve(stack_[k], stack_[k + 1], stack_[k + 2], stack_[k + 3], stack_[k + 4], stack_[k + 5]);
          }
          if (k + 1 < stack_.size()) line_to(x_ + stack_[k], y_ + stack_[k + 1]);
          stack_.clear();
          break;
        }
        case 25:  // rlinecurve
        {
          std::size_t k = 0;
          for (; k + 6 < stack_.size(); k += 2) line_to(x_ + stack_[k], y_ + stack_[k + 1]);
          if (k + 5 < stack_.size()) {
            rcurve(stack_[k], stack_[k + 1], stack_[k + 2], stack_[k + 3], stack_[k + 4], stack_[k + 5]);
          }
          stack_.clear();
          break;
        }
        case 26:  // vvcurveto
        {
          std::size_t k = 0;
          double dx1 = 0;
          if (stack_.size() % 4 == 1) dx1 = stack_[k++];
          for (; k + 3 < stack_.size(); k += 4) {
            rcurve(dx1, stack_[k], stack_[k + 1], stack_[k + 2], 0, stack_[k + 3]);
            dx1 = 0;
          }
          stack_.clear();
          break;
        }
        case 27:  // hhcurveto
        {
          std::size_t k = 0;
          double dy1 = 0;
          if (stack_.size() % 4 == 1) dy1 = stack_[k++];
          for (; k + 3 < stack_.size(); k += 4) {
            rcurve(stack_[k], dy1, stack_[k + 1], stack_[k + 2], stack_[k + 3], 0);
            dy1 = 0;
          }
          stack_.clear();
          break;
        }
        case 30:  // vhcurveto
        case 31:  // hvcurveto
        {
          bool horizontal = b0 == 31;
          std::size_t k = 0;
          const std::size_t count = stack_.size();
          while (k + 3 < count) {
            const bool last = k + 4 >= count - 1;
            const double extra = (last && count - k == 5) ? stack_[k + 4] : 0.0;
            if (horizontal) {
              rcurve(stack_[k], 0, stack_[k + 1], stack_[k + 2], extra, stack_[k + 3]);
            } else {
              rcurve(0, stack_[k], stack_[k + 1], stack_[k + 2], stack_[k + 3], extra);
            }
            horizontal = !horizontal;
            k += 4;
          }
          stack_.clear();
          break;
        }
        case 10:  // callsubr
        {
          need(1);
          const CffIndex& subrs = font_.local_subrs.at(fd_);
          const auto idx = static_cast<long>(pop()) + subr_bias(subrs.count());
          if (idx < 0) unreadable("negative subroutine index");
          execute(subrs.item(static_cast<std::size_t>(idx)), depth + 1);
          if (ended_) return;
          break;
        }
        case 29:  // callgsubr
        {
          need(1);
          const auto idx = static_cast<long>(pop()) + subr_bias(font_.global_subrs.count());
          if (idx < 0) unreadable("negative subroutine index");
          execute(font_.global_subrs.item(static_cast<std::size_t>(idx)), depth + 1);
          if (ended_) return;
          break;
        }
        case 11:  // return
          return;
        case 14:  // endchar
          take_width(stack_.size() == 1 || stack_.size() == 5);
          if (stack_.size() >= 4) unreadable("seac-style endchar is not supported");
          close_contour();
          ended_ = true;
          stack_.clear();
          return;
        case 12: {
          const int b1 = cs.u8(i++);
          flex_op(b1);
          break;
        }
        default:
          unreadable("unsupported charstring operator " + std::to_string(b0));
      }
    }
  }

  void flex_op(int op) {
    const auto& s = stack_;
    switch (op) {
      case 35:  // flex
        need(13);
        rcurve(s[0], s[1], s[2], s[3], s[4], s[5]);
        rcurve(s[6], s[7], s[8], s[9], s[10], s[11]);
        break;
      case 34:  // hflex
      {
        need(7);
        rcurve(s[0], 0, s[1], s[2], s[3], 0);
        rcurve(s[4], 0, s[5], -s[2], s[6], 0);
        break;
      }
      case 36:  // hflex1
      {
        need(9);
        rcurve(s[0], s[1], s[2], s[3], s[4], 0);
        const double dy = s[1] + s[3] + s[7];
        rcurve(s[5], 0, s[6], s[7], s[8], -dy);
        break;
      }
      case 37:  // flex1
      {
        need(11);
        const double dx = s[0] + s[2] + s[4] + s[6] + s[8];
        const double dy = s[1] + s[3] + s[5] + s[7] + s[9];
        rcurve(s[0], s[1], s[2], s[3], s[4], s[5]);
        if (std::abs(dx) > std::abs(dy)) rcurve(s[6], s[7], s[8], s[9], s[10], -dy);
        else rcurve(s[6], s[7], s[8], s[9], -dx, s[10]);
        break;
      }
      default:
        unreadable("unsupported escaped charstring operator 12 " + std::to_string(op));
    }
    stack_.clear();
  }

  void push(double v) {
    if (stack_.size() >= 513) unreadable("charstring stack overflow");
    stack_.push_back(v);
  }
  double pop() {
    const double v = stack_.back();
    stack_.pop_back();
    return v;
  }
  void need(std::size_t n) const {
    if (stack_.size() < n) unreadable("charstring stack underflow");
  }
  double arg(std::size_t k) const { return stack_[k]; }

  void take_width(bool present) {
    if (!width_seen_ && present) stack_.erase(stack_.begin());
    width_seen_ = true;
  }

  void move_to(double x, double y) {
    close_contour();
    stack_.clear();
    x_ = x;
    y_ = y;
    start_ = {x, y};
    open_ = true;
  }
  void line_to(double x, double y) {
    current_.push_back({Segment::Kind::Line, {x_, y_}, {}, {}, {x, y}});
    x_ = x;
    y_ = y;
  }
  void rcurve(double dx1, double dy1, double dx2, double dy2, double dx3, double dy3) {
    const Point p0{x_, y_};
    const Point c1{p0.x + dx1, p0.y + dy1};
    const Point c2{c1.x + dx2, c1.y + dy2};
    const Point p1{c2.x + dx3, c2.y + dy3};
    current_.push_back({Segment::Kind::Cubic, p0, c1, c2, p1});
    x_ = p1.x;
    y_ = p1.y;
  }
  void close_contour() {
    if (open_ && !current_.empty()) {
      if (x_ != start_.x || y_ != start_.y) {
        current_.push_back({Segment::Kind::Line, {x_, y_}, {}, {}, start_});
      }
      out_.contours.push_back(std::move(current_));
    }
    current_.clear();
    open_ = false;
  }

  const CffFont& font_;
  std::size_t fd_;
  std::vector<double> stack_;
  GlyphOutline out_;
  std::vector<Segment> current_;
  Point start_;
  double x_ = 0, y_ = 0;
  int stems_ = 0;
  bool width_seen_ = false;
  bool open_ = false;
  bool ended_ = false;
};

}  // namespace

struct FontFile::Impl {
  std::vector<std::uint8_t> bytes;
  Reader font;
  int units_per_em = 1000;
  std::size_t num_glyphs = 0;
  int loca_format = 0;
  Reader loca;
  Reader glyf;
  CmapSubtable cmap;
  std::optional<CffFont> cff;

  void parse() {
    const Reader file(bytes);
    std::size_t base = 0;
    if (file.size() < 12) unreadable("file too small to be a font");
    std::uint32_t version = file.u32(0);
    if (version == tag("ttcf")) {
      base = file.u32(12);
      version = file.u32(base);
    }
    if (version != 0x00010000 && version != tag("true") && version != tag("OTTO")) {
      unreadable("not an sfnt font");
    }
    font = file;
    const std::uint16_t num_tables = file.u16(base + 4);
    std::map<std::uint32_t, Reader> tables;
    for (std::uint16_t i = 0; i < num_tables; ++i) {
      const std::size_t rec = base + 12 + 16 * std::size_t{i};
      const std::uint32_t t = file.u32(rec);
      const std::uint32_t off = file.u32(rec + 8);
      const std::uint32_t len = file.u32(rec + 12);
      tables[t] = file.sub(off, len);
    }
    auto need = [&](const char (&name)[5]) -> const Reader& {
      const auto it = tables.find(tag(name));
      if (it == tables.end()) unreadable(std::string("missing table '") + name + "'");
      return it->second;
    };
    const Reader& head = need("head");
    units_per_em = head.u16(18);
    if (units_per_em == 0) unreadable("unitsPerEm is zero");
    loca_format = head.i16(50);
    num_glyphs = need("maxp").u16(4);
    cmap = choose_cmap(need("cmap"));
    if (tables.count(tag("glyf"))) {
      glyf = tables[tag("glyf")];
      loca = need("loca");
    } else if (tables.count(tag("CFF "))) {
      cff = parse_cff(tables[tag("CFF ")]);
    } else {
      unreadable("font has neither glyf nor CFF outlines");
    }
  }

  void glyf_outline(std::uint16_t glyph, const Affine& xf, int depth, GlyphOutline& out) const {
    if (depth > 8) unreadable("composite glyph nesting too deep");
    if (glyph >= num_glyphs) unreadable("glyph index out of range");
    std::size_t start = 0, end = 0;
    if (loca_format == 0) {
      start = std::size_t{loca.u16(2 * std::size_t{glyph})} * 2;
      end = std::size_t{loca.u16(2 * std::size_t{glyph} + 2)} * 2;
    } else {
      start = loca.u32(4 * std::size_t{glyph});
      end = loca.u32(4 * std::size_t{glyph} + 4);
    }
    if (end <= start) return;  // empty glyph (e.g. space)
    const Reader g = glyf.sub(start, end - start);
    const std::int16_t contours = g.i16(0);
    if (contours >= 0) {
      simple_glyph(g, contours, xf, out);
    } else {
      composite_glyph(g, xf, depth, out);
    }
  }

  static void simple_glyph(const Reader& g, int contours, const Affine& xf, GlyphOutline& out) {
    std::vector<std::uint16_t> end_pts(contours);
    for (int i = 0; i < contours; ++i) end_pts[i] = g.u16(10 + 2 * i);
    if (contours == 0) return;
    const std::size_t n_points = std::size_t{end_pts.back()} + 1;
    std::size_t at = 10 + 2 * std::size_t(contours);
    const std::uint16_t instr_len = g.u16(at);
    at += 2 + instr_len;
    std::vector<std::uint8_t> flags;
    flags.reserve(n_points);
    while (flags.size() < n_points) {
      const std::uint8_t f = g.u8(at++);
      flags.push_back(f);
      if (f & 0x08) {
        const std::uint8_t repeat = g.u8(at++);
        for (int r = 0; r < repeat && flags.size() < n_points; ++r) flags.push_back(f);
      }
    }
    std::vector<double> xs(n_points), ys(n_points);
    int coord = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 0x02) {
        const int dx = g.u8(at++);
        coord += (f & 0x10) ? dx : -dx;
      } else if (!(f & 0x10)) {
        coord += g.i16(at);
        at += 2;
      }
      xs[i] = coord;
    }
    coord = 0;
    for (std::size_t i = 0; i < n_points; ++i) {
      const std::uint8_t f = flags[i];
      if (f & 0x04) {
        const int dy = g.u8(at++);
        coord += (f & 0x20) ? dy : -dy;
      } else if (!(f & 0x20)) {
        coord += g.i16(at);
        at += 2;
      }
      ys[i] = coord;
    }
    std::size_t first = 0;
    for (int c = 0; c < contours; ++c) {
      const std::size_t last = end_pts[c];
      if (last < first || last >= n_points) unreadable("bad contour end point");
      std::vector<RawPoint> pts;
      for (std::size_t i = first; i <= last; ++i) {
        const Point p = xf.apply(xs[i], ys[i]);
        pts.push_back({p.x, p.y, (flags[i] & 0x01) != 0});
      }
      append_contour(pts, out);
      first = last + 1;
    }
  }

  void composite_glyph(const Reader& g, const Affine& parent, int depth, GlyphOutline& out) const {
    std::size_t at = 10;
    for (;;) {
      const std::uint16_t flags = g.u16(at);
      const std::uint16_t component = g.u16(at + 2);
      at += 4;
      double arg1 = 0, arg2 = 0;
      if (flags & 0x0001) {
        arg1 = g.i16(at);
        arg2 = g.i16(at + 2);
        at += 4;
      } else {
        arg1 = static_cast<std::int8_t>(g.u8(at));
        arg2 = static_cast<std::int8_t>(g.u8(at + 1));
        at += 2;
      }
      auto f2dot14 = [&](std::size_t p) { return g.i16(p) / 16384.0; };
      Affine local;
      if (flags & 0x0008) {
        local.a = local.d = f2dot14(at);
        at += 2;
      } else if (flags & 0x0040) {
        local.a = f2dot14(at);
        local.d = f2dot14(at + 2);
        at += 4;
      } else if (flags & 0x0080) {
        local.a = f2dot14(at);
        local.b = f2dot14(at + 2);
        local.c = f2dot14(at + 4);
        local.d = f2dot14(at + 6);
        at += 8;
      }
      if (flags & 0x0002) {
        // Offsets are scaled only when SCALED_COMPONENT_OFFSET is set.
        if (flags & 0x0800) {
          local.dx = local.a * arg1 + local.c * arg2;
          local.dy = local.b * arg1 + local.d * arg2;
        } else {
          local.dx = arg1;
          local.dy = arg2;
        }
      }
      // Point-matching placement (flag bit 1 clear) is rare; treated as zero offset.
      Affine combined;
      combined.a = parent.a * local.a + parent.c * local.b;
      combined.b = parent.b * local.a + parent.d * local.b;
      combined.c = parent.a * local.c + parent.c * local.d;
      combined.d = parent.b * local.c + parent.d * local.d;
      combined.dx = parent.a * local.dx + parent.c * local.dy + parent.dx;
      combined.dy = parent.b * local.dx + parent.d * local.dy + parent.dy;
      glyf_outline(component, combined, depth + 1, out);
      if (!(flags & 0x0020)) break;
    }
  }
};

FontFile::FontFile(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
FontFile::FontFile(FontFile&&) noexcept = default;
FontFile& FontFile::operator=(FontFile&&) noexcept = default;
FontFile::~FontFile() = default;

FontFile FontFile::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) unreadable("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_bytes(std::move(bytes));
  } catch (const Error& e) {
    throw Error(ErrorCode::UnreadableFont, path.filename().string() + ": " + e.what());
  }
}

FontFile FontFile::from_bytes(std::vector<std::uint8_t> bytes) {
  auto impl = std::make_unique<Impl>();
  impl->bytes = std::move(bytes);
  impl->parse();
  return FontFile(std::move(impl));
}

int FontFile::units_per_em() const noexcept { return impl_->units_per_em; }
std::size_t FontFile::num_glyphs() const noexcept { return impl_->num_glyphs; }
bool FontFile::has_cff_outlines() const noexcept { return impl_->cff.has_value(); }

std::optional<std::uint16_t> FontFile::glyph_index(char32_t codepoint) const {
  auto g = cmap_lookup(impl_->cmap, codepoint);
  // Symbol-encoded fonts conventionally map ASCII into the F000 page.
  if (!g && impl_->cmap.format == 4 && codepoint < 0x100) g = cmap_lookup(impl_->cmap, 0xF000 + codepoint);
  if (g && *g >= impl_->num_glyphs) return std::nullopt;
  return g;
}

GlyphOutline FontFile::outline(char32_t codepoint) const {
  const auto g = glyph_index(codepoint);
  if (!g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "U+%04X not in cmap", static_cast<unsigned>(codepoint));
    throw Error(ErrorCode::MissingGlyph, buf);
  }
  return outline_by_index(*g);
}

GlyphOutline FontFile::outline_by_index(std::uint16_t glyph) const {
  GlyphOutline out;
  if (impl_->cff) {
    const CffFont& cff = *impl_->cff;
    if (glyph >= cff.charstrings.count()) unreadable("glyph index beyond CharStrings");
    CharstringBuilder builder(cff, cff.fd_for(glyph));
    return builder.run(cff.charstrings.item(glyph));
  }
  impl_->glyf_outline(glyph, Affine{}, 0, out);
  return out;
}

}  // namespace glyphembed::glyphset
