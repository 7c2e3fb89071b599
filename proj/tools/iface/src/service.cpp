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

#include "glyphembed/iface/service.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>

#include <nlohmann/json.hpp>

#include "glyphembed/glyphset/charset.hpp"
#include "glyphembed/glyphset/image.hpp"

namespace glyphembed::iface {

namespace fs = std::filesystem;
using nlohmann::json;

ApiResponse api_error(int status, std::string_view code, std::string_view message) {
  return {status, "application/json",
          json{{"status", status}, {"code", code}, {"message", message}}.dump()};
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownFont:
    case ErrorCode::UnknownCharacter:
      return 404;
    case ErrorCode::ModelUnavailable:
    case ErrorCode::EmptyIndex:
      return 503;
    default:
      return 400;
  }
}

// what() is "<Code>: <message>"; the code travels separately.
std::string_view bare_message(const Error& e) {
  std::string_view w = e.what();
  const auto prefix = to_string(e.code());
  if (w.substr(0, prefix.size()) == prefix && w.substr(prefix.size(), 2) == ": ") w.remove_prefix(prefix.size() + 2);
  return w;
}

std::optional<char32_t> parse_char(std::string_view s) {
  if (auto cp = glyphset::decode_single_utf8(s)) return cp;
  if (s.size() > 2 && (s.substr(0, 2) == "U+" || s.substr(0, 2) == "u+")) {
    std::uint32_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data() + 2, end, v, 16);
    if (ec == std::errc() && ptr == end && v <= 0x10FFFF) return static_cast<char32_t>(v);
  }
  return std::nullopt;
}

json hits_json(const std::vector<index::QueryHit>& hits, const std::function<json(std::size_t)>& url) {
  json results = json::array();
  for (const auto& h : hits) {
    json r{{"font_id", h.font_id}, {"distance", h.distance}, {"preview_url", url(h.font)}};
    if (h.best_char) r["best_char"] = glyphset::encode_utf8(*h.best_char);
    results.push_back(std::move(r));
  }
  return json{{"results", std::move(results)}};
}

}  // namespace

ApiResponse api_error(const Error& e) { return api_error(http_status(e.code()), to_string(e.code()), bare_message(e)); }

Service::Service(index::FontEmbeddingIndex index, std::optional<nn::Encoder<float>> model, fs::path preview_root,
                 ServiceOptions options)
    : index_(std::move(index)), model_(std::move(model)), preview_root_(std::move(preview_root)), options_(options) {
  if (model_ && model_->config().feat_dim != static_cast<int>(index_.feat_dim())) {
    throw Error(ErrorCode::ShapeMismatch, "model feat_dim differs from the index");
  }
  // The map depends only on the index, so it is computed once.
  try {
    const auto m = index::project_2d(index_);
    json points = json::array();
    for (std::size_t i = 0; i < m.font_ids.size(); ++i) {
      points.push_back({{"font_id", m.font_ids[i]}, {"x", m.x(i)}, {"y", m.y(i)}});
    }
    map_.body = json{{"points", std::move(points)}, {"explained_variance", m.explained_variance}, {"method", m.method}}
                    .dump();
  } catch (const Error& e) {
    map_ = api_error(e);
  }
}

std::optional<std::string> Service::preview_url(std::size_t font) const {
  if (index_.previews.empty()) return std::nullopt;
  return "/api/preview/" + index_.font_ids()[font] + ".png";
}

ApiResponse Service::fonts() const {
  json fonts = json::array();
  for (std::size_t f = 0; f < index_.num_fonts(); ++f) {
    const auto url = preview_url(f);
    fonts.push_back({{"id", index_.font_ids()[f]}, {"preview_url", url ? json(*url) : json(nullptr)}});
  }
  return {200, "application/json", json{{"fonts", std::move(fonts)}}.dump()};
}

ApiResponse Service::retrieve(const RetrieveBody& body, std::optional<std::string_view> k_param,
                              std::optional<std::string_view> mode_param) const {
  try {
    std::size_t k = options_.default_k;
    if (k_param) {
      const auto [ptr, ec] = std::from_chars(k_param->data(), k_param->data() + k_param->size(), k);
      if (ec != std::errc() || ptr != k_param->data() + k_param->size() || k == 0) {
        return api_error(400, "InvalidArgument", "k must be a positive integer");
      }
    }
    const auto mode = mode_param ? index::query_mode_from_string(*mode_param) : index::QueryMode::PerGlyph;
    if (body.bytes.size() > options_.max_upload_bytes) {
      return api_error(413, "PayloadTooLarge", "request body exceeds " + std::to_string(options_.max_upload_bytes) +
                                                   " bytes");
    }
    auto url = [this](std::size_t f) {
      const auto u = preview_url(f);
      return u ? json(*u) : json(nullptr);
    };

    switch (body.kind) {
      case RetrieveBody::Kind::Missing:
        return api_error(400, "InvalidArgument", "expected a multipart 'image' upload or a JSON body");
      case RetrieveBody::Kind::Image: {
        if (!model_) return api_error(503, "ModelUnavailable", "service was started without a model");
        const auto gray = glyphset::decode_png(
            std::span(reinterpret_cast<const std::uint8_t*>(body.bytes.data()), body.bytes.size()));
        glyphset::GlyphImage probe;
        probe.font_id = "upload";
        probe.size = index_.glyph_size;
        probe.pixels = glyphset::resize_bilinear(glyphset::to_unit(gray.pixels), gray.width, gray.height,
                                                 index_.glyph_size, index_.glyph_size);
        const auto hits = index::query(index_, &*model_, probe, k, mode);
        return {200, "application/json", hits_json(hits, url).dump()};
      }
      case RetrieveBody::Kind::Json: {
        const json req = json::parse(body.bytes, nullptr, false);
        if (req.is_discarded() || !req.is_object()) return api_error(400, "InvalidArgument", "body is not a JSON object");
        if (!req.contains("font_id") || !req["font_id"].is_string() || !req.contains("char") ||
            !req["char"].is_string()) {
          return api_error(400, "InvalidArgument", "expected {\"font_id\": string, \"char\": string}");
        }
        const auto cp = parse_char(req["char"].get<std::string>());
        if (!cp) return api_error(400, "InvalidArgument", "char must be one character or U+XXXX");
        const std::size_t f = index_.font_index(req["font_id"].get<std::string>());
        const std::size_t c = index_.char_index(*cp);
        const auto hits = index::query(index_, index_.glyphs.vec(f, c), k, mode);
        return {200, "application/json", hits_json(hits, url).dump()};
      }
    }
    return api_error(400, "InvalidArgument", "unsupported body");
  } catch (const Error& e) {
    return api_error(e);
  } catch (const std::exception&) {
    return api_error(500, "Internal", "internal error");
  }
}

ApiResponse Service::map() const { return map_; }

ApiResponse Service::png_file(const fs::path& path, std::string_view what) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) return api_error(404, "NotFound", std::string(what) + " is not available");
  return {200, "image/png", std::string(std::istreambuf_iterator<char>(in), {})};
}

ApiResponse Service::glyph(std::string_view font_id, std::string_view file) const {
  try {
    const std::size_t f = index_.font_index(std::string(font_id));
    if (file.size() <= 4 || file.substr(file.size() - 4) != ".png") {
      return api_error(404, "NotFound", "glyph path must be <hex codepoint>.png");
    }
    const auto hex = file.substr(0, file.size() - 4);
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
    if (ec != std::errc() || ptr != hex.data() + hex.size() || v > 0x10FFFF) {
      return api_error(404, "NotFound", "glyph path must be <hex codepoint>.png");
    }
    const auto cp = static_cast<char32_t>(v);
    index_.char_index(cp);
    if (index_.previews.empty()) return api_error(404, "NotFound", "index was built without glyph images");
    const auto dir = (preview_root_ / index_.previews[f]).parent_path();
    return png_file(dir / std::string(font_id) / (glyphset::codepoint_hex(cp) + ".png"), "glyph image");
  } catch (const Error& e) {
    return api_error(e);
  }
}

ApiResponse Service::preview(std::string_view file) const {
  try {
    if (file.size() <= 4 || file.substr(file.size() - 4) != ".png") {
      return api_error(404, "NotFound", "preview path must be <font_id>.png");
    }
    const std::size_t f = index_.font_index(std::string(file.substr(0, file.size() - 4)));
    if (index_.previews.empty()) return api_error(404, "NotFound", "index was built without previews");
    return png_file(preview_root_ / index_.previews[f], "preview");
  } catch (const Error& e) {
    return api_error(e);
  }
}

ApiResponse Service::health() const {
  return {200, "application/json", json{{"status", "ok"}, {"index_version", index::kIndexVersion}}.dump()};
}

}  // namespace glyphembed::iface
