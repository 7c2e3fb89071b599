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

#include "glyphembed/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "glyphembed/error.hpp"

namespace glyphembed::nn {

static_assert(sizeof(float) == 4);

namespace container {
namespace {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> write(const char magic[4], std::uint32_t version, const nlohmann::json& header,
                                const std::vector<const Tensor<float>*>& blobs) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(magic, magic + 4);
  put_le<std::uint32_t>(out, version);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto* t : blobs) {
    for (const float v : t->values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Parsed read(const std::vector<std::uint8_t>& bytes, const char magic[4], std::uint32_t expected_version) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), magic, 4) != 0) {
    throw Error(ErrorCode::Corrupt, std::string("missing ") + std::string(magic, 4) + " magic");
  }
  Parsed p;
  p.version = get_le<std::uint32_t>(bytes.data() + 4);
  if (p.version != expected_version) {
    throw Error(ErrorCode::VersionMismatch, "format version " + std::to_string(p.version) + ", reader supports " +
                                                std::to_string(expected_version));
  }
  const auto len = get_le<std::uint64_t>(bytes.data() + 8);
  if (len > bytes.size() - 16) throw Error(ErrorCode::Corrupt, "header length exceeds file size");
  try {
    p.header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("header: ") + e.what());
  }
  p.payload = bytes.data() + 16 + len;
  p.payload_size = bytes.size() - 16 - len;
  return p;
}

std::vector<float> floats(const Parsed& parsed, std::uint64_t offset, std::size_t count) {
  if (offset > parsed.payload_size || count > (parsed.payload_size - offset) / 4) {
    throw Error(ErrorCode::Corrupt, "tensor data truncated");
  }
  std::vector<float> out(count);
  const std::uint8_t* p = parsed.payload + offset;
  for (std::size_t i = 0; i < count; ++i) out[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Corrupt, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  // Write to a sibling and rename so readers never observe a partial file.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Corrupt, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Corrupt, "cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

}  // namespace container

const Tensor<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

ParamStore<float> Checkpoint::params(const std::string& prefix) const {
  ParamStore<float> out;
  for (const auto& [n, t] : tensors) {
    if (n.rfind(prefix, 0) != 0) continue;
    const auto i = out.add(n.substr(prefix.size()), t.shape);
    out[i].value = t;
  }
  return out;
}

void Checkpoint::add_params(const std::string& prefix, const ParamStore<float>& params) {
  for (const auto& e : params) tensors.emplace_back(prefix + e.name, e.value);
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt, std::uint32_t version) {
  nlohmann::json table = nlohmann::json::array();
  std::vector<const Tensor<float>*> blobs;
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    if (t.size() != Tensor<float>::count(t.shape)) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + name + " has inconsistent shape");
    }
    table.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
    offset += 4 * t.size();
    blobs.push_back(&t);
  }
  nlohmann::json header{{"kind", ckpt.kind}, {"config", ckpt.config}, {"metadata", ckpt.metadata}, {"tensors", table}};
  return container::write("GEMB", version, header, blobs);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  const auto parsed = container::read(bytes, "GEMB", kCheckpointVersion);
  Checkpoint ckpt;
  try {
    ckpt.kind = parsed.header.at("kind").get<std::string>();
    ckpt.config = parsed.header.at("config");
    ckpt.metadata = parsed.header.at("metadata");
    std::uint64_t expected_end = 0;
    for (const auto& entry : parsed.header.at("tensors")) {
      auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const std::size_t n = Tensor<float>::count(shape);
      ckpt.tensors.emplace_back(entry.at("name").get<std::string>(),
                                Tensor<float>(std::move(shape), container::floats(parsed, offset, n)));
      expected_end = std::max<std::uint64_t>(expected_end, offset + 4 * n);
    }
    if (expected_end != parsed.payload_size) throw Error(ErrorCode::Corrupt, "payload size does not match table");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("header: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  container::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(container::read_file(path));
}

}  // namespace glyphembed::nn
