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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/nn/param_store.hpp"
#include "glyphembed/nn/tensor.hpp"

namespace glyphembed::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// File layout: "GEMB", u32 version, u64 header length, JSON header
// {kind, config, metadata, tensors: [{name, shape, offset}]}, then the tensor
// blobs as little-endian f32 in table order. Offsets are relative to the end
// of the header.
struct Checkpoint {
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  const Tensor<float>* find(const std::string& name) const;
  // Tensors whose names start with `prefix`, with the prefix stripped.
  ParamStore<float> params(const std::string& prefix) const;
  void add_params(const std::string& prefix, const ParamStore<float>& params);
};

// Throws Error(Corrupt) on I/O failure.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Errors: Corrupt (bad magic, truncation, malformed header); VersionMismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt, std::uint32_t version = kCheckpointVersion);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

// Shared by the checkpoint and index formats: magic, version, JSON header and
// little-endian f32 payload.
namespace container {
std::vector<std::uint8_t> write(const char magic[4], std::uint32_t version, const nlohmann::json& header,
                                const std::vector<const Tensor<float>*>& blobs);
struct Parsed {
  std::uint32_t version = 0;
  nlohmann::json header;
  const std::uint8_t* payload = nullptr;
  std::size_t payload_size = 0;
};
// Throws Corrupt / VersionMismatch (when version != expected).
Parsed read(const std::vector<std::uint8_t>& bytes, const char magic[4], std::uint32_t expected_version);
// Reads `count` floats at byte `offset` in the payload; throws Corrupt.
std::vector<float> floats(const Parsed& parsed, std::uint64_t offset, std::size_t count);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
}  // namespace container

}  // namespace glyphembed::nn
