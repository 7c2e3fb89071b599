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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "glyphembed/error.hpp"
#include "glyphembed/index/font_index.hpp"
#include "glyphembed/nn/models.hpp"

namespace glyphembed::iface {

inline constexpr std::size_t kMaxUploadBytes = 1 << 20;

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// {"status": <http status>, "code": "<machine code>", "message": "..."}
ApiResponse api_error(int status, std::string_view code, std::string_view message);
// HTTP status and machine code for a library error.
ApiResponse api_error(const Error& e);

struct ServiceOptions {
  std::size_t default_k = 10;
  std::size_t max_upload_bytes = kMaxUploadBytes;
};

// Body of POST /api/retrieve, already separated by the transport.
struct RetrieveBody {
  enum class Kind { Json, Image, Missing } kind = Kind::Missing;
  std::string bytes;
};

// Request handlers over an immutable index (and optional encoder). Every
// handler is const, deterministic and safe to call concurrently.
class Service {
 public:
  // preview_root: directory the index's preview paths are relative to.
  Service(index::FontEmbeddingIndex index, std::optional<nn::Encoder<float>> model,
          std::filesystem::path preview_root, ServiceOptions options = {});

  const index::FontEmbeddingIndex& index() const noexcept { return index_; }
  bool has_model() const noexcept { return model_.has_value(); }

  ApiResponse fonts() const;
  // k and mode are the raw query parameters, if present.
  ApiResponse retrieve(const RetrieveBody& body, std::optional<std::string_view> k,
                       std::optional<std::string_view> mode) const;
  ApiResponse map() const;
  // file: "<hex codepoint>.png"
  ApiResponse glyph(std::string_view font_id, std::string_view file) const;
  // file: "<font_id>.png"
  ApiResponse preview(std::string_view file) const;
  ApiResponse health() const;

 private:
  std::optional<std::string> preview_url(std::size_t font) const;
  ApiResponse png_file(const std::filesystem::path& path, std::string_view what) const;

  index::FontEmbeddingIndex index_;
  std::optional<nn::Encoder<float>> model_;
  std::filesystem::path preview_root_;
  ServiceOptions options_;
  ApiResponse map_;
};

}  // namespace glyphembed::iface
