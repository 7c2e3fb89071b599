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

#include "glyphembed/glyphset/charset.hpp"

#include <algorithm>
#include <cstdio>

#include "glyphembed/error.hpp"

namespace glyphembed::glyphset {
namespace {

std::vector<char32_t> ascii_range(char lo, char hi) {
  std::vector<char32_t> out;
  for (char c = lo; c <= hi; ++c) out.push_back(static_cast<char32_t>(c));
  return out;
}

int ascii_class(char c) {
  if (c >= '0' && c <= '9') return 0;
  if (c >= 'A' && c <= 'Z') return 1;
  if (c >= 'a' && c <= 'z') return 2;
  return -1;
}

std::vector<char32_t> parse_component(std::string_view part) {
  if (part == "0-9") return ascii_range('0', '9');
  if (part == "A-Z") return ascii_range('A', 'Z');
  if (part == "a-z") return ascii_range('a', 'z');
  if (part == "a-Z") {
    auto out = ascii_range('A', 'Z');
    auto lower = ascii_range('a', 'z');
    out.insert(out.end(), lower.begin(), lower.end());
    return out;
  }
  if (part == "0-Z") {
    auto out = ascii_range('0', '9');
    for (auto cp : parse_component("a-Z")) out.push_back(cp);
    return out;
  }
  if (part.size() == 3 && part[1] == '-') {
    const char lo = part[0];
    const char hi = part[2];
    if (ascii_class(lo) >= 0 && ascii_class(lo) == ascii_class(hi) && lo <= hi) {
      return ascii_range(lo, hi);
    }
  }
  if (part.size() == 1) return {static_cast<char32_t>(part[0])};
  throw Error(ErrorCode::InvalidCharset, "unrecognized charset label '" + std::string(part) + "'");
}

}  // namespace

CharSet::CharSet(std::string id, std::vector<char32_t> codepoints)
    : id_(std::move(id)), codepoints_(std::move(codepoints)) {
  std::sort(codepoints_.begin(), codepoints_.end());
  if (codepoints_.empty()) throw Error(ErrorCode::InvalidCharset, "charset '" + id_ + "' is empty");
  if (std::adjacent_find(codepoints_.begin(), codepoints_.end()) != codepoints_.end()) {
    throw Error(ErrorCode::InvalidCharset, "charset '" + id_ + "' has duplicate codepoints");
  }
}

CharSet CharSet::named(std::string_view id) {
  std::vector<char32_t> all;
  std::size_t start = 0;
  while (start <= id.size()) {
    const auto plus = id.find('+', start);
    const auto part = id.substr(start, plus == std::string_view::npos ? id.size() - start : plus - start);
    if (part.empty()) throw Error(ErrorCode::InvalidCharset, "empty component in '" + std::string(id) + "'");
    auto cps = parse_component(part);
    all.insert(all.end(), cps.begin(), cps.end());
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return CharSet(std::string(id), std::move(all));
}

std::optional<std::size_t> CharSet::index_of(char32_t cp) const {
  const auto it = std::lower_bound(codepoints_.begin(), codepoints_.end(), cp);
  if (it == codepoints_.end() || *it != cp) return std::nullopt;
  return static_cast<std::size_t>(it - codepoints_.begin());
}

std::string codepoint_label(char32_t cp) {
  if (cp >= 0x21 && cp < 0x7f) return std::string(1, static_cast<char>(cp));
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

std::string codepoint_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04x", static_cast<unsigned>(cp));
  return buf;
}

std::optional<char32_t> decode_single_utf8(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(text[0]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    len = 1;
    cp = b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (text.size() != len) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[i]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  return cp;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

}  // namespace glyphembed::glyphset
