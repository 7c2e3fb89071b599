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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glyphembed::glyphset {

// Ordered set of Unicode codepoints with a short label.
//
// Named sets: "0-9", "A-Z", "a-z", "a-Z" (both cases), "0-Z" (digits and both
// cases). Any "X-Y" label whose ends are single ASCII characters of the same
// class (e.g. "A-M", "n-z", "3-7") denotes that contiguous range. A label may
// also join sets with '+', e.g. "0-9+A-Z".
class CharSet {
 public:
  CharSet(std::string id, std::vector<char32_t> codepoints);

  static CharSet named(std::string_view id);

  const std::string& id() const noexcept { return id_; }
  const std::vector<char32_t>& codepoints() const noexcept { return codepoints_; }
  std::size_t size() const noexcept { return codepoints_.size(); }
  char32_t operator[](std::size_t i) const { return codepoints_[i]; }

  std::optional<std::size_t> index_of(char32_t cp) const;
  bool contains(char32_t cp) const { return index_of(cp).has_value(); }

  friend bool operator==(const CharSet&, const CharSet&) = default;

 private:
  std::string id_;
  std::vector<char32_t> codepoints_;
};

// Printable representation of a codepoint: the character itself when it is
// printable ASCII, otherwise "U+XXXX".
std::string codepoint_label(char32_t cp);

// Four-digit (or longer) lowercase hex, as used in the pre-rendered layout.
std::string codepoint_hex(char32_t cp);

// Parses a single UTF-8 encoded character; returns nullopt unless the input is
// exactly one codepoint.
std::optional<char32_t> decode_single_utf8(std::string_view text);

std::string encode_utf8(char32_t cp);

}  // namespace glyphembed::glyphset
