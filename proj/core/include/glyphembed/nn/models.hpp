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
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/glyphset/image.hpp"
#include "glyphembed/nn/ops.hpp"
#include "glyphembed/nn/param_store.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::nn {

inline constexpr std::size_t kProjectionDim = 70;

// Plain CNN: per stage a 3x3 stride-2 convolution and ReLU, then global
// average pooling. The last stage has feat_dim channels.
struct EncoderConfig {
  int input_size = 64;
  std::vector<int> channels{16, 32, 64};
  int feat_dim = 128;

  std::size_t stages() const { return channels.size() + 1; }
  std::vector<std::size_t> stage_channels() const;
  // Side of the last feature map.
  std::size_t final_spatial() const { return static_cast<std::size_t>(input_size) >> stages(); }

  // Throws ConfigInvalid.
  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

template <typename T>
class Encoder {
 public:
  struct Tape {
    std::size_t batch = 0;
    std::vector<Tensor<T>> cols;  // im2col of each stage input
    std::vector<Tensor<T>> acts;  // post-ReLU output of each stage
  };

  Encoder(const EncoderConfig& config, Rng& rng);
  // Adopts existing parameters; names and shapes must match a fresh model.
  Encoder(const EncoderConfig& config, ParamStore<T> params);

  const EncoderConfig& config() const noexcept { return config_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

  // images: B x H x W. Returns B x feat_dim.
  Tensor<T> forward(const Tensor<T>& images, Tape* tape = nullptr) const;
  // Accumulates parameter gradients from d(loss)/d(output).
  void backward(const Tape& tape, const Tensor<T>& dfeat);

  template <typename U>
  Encoder<U> cast() const {
    return Encoder<U>(config_, params_.template cast<U>());
  }

 private:
  EncoderConfig config_;
  ParamStore<T> params_;
};

// FC(feat, feat) - ReLU - FC(feat, 70).
template <typename T>
class ProjectionHead {
 public:
  struct Tape {
    Tensor<T> input;
    Tensor<T> hidden;
  };

  ProjectionHead(std::size_t feat_dim, Rng& rng);
  ProjectionHead(std::size_t feat_dim, ParamStore<T> params);

  std::size_t feat_dim() const noexcept { return feat_dim_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

  Tensor<T> forward(const Tensor<T>& fhat, Tape* tape = nullptr) const;
  Tensor<T> backward(const Tape& tape, const Tensor<T>& dz);

  template <typename U>
  ProjectionHead<U> cast() const {
    return ProjectionHead<U>(feat_dim_, params_.template cast<U>());
  }

 private:
  std::size_t feat_dim_;
  ParamStore<T> params_;
};

// Single affine map; used as the font classifier and the attribute probe.
template <typename T>
class LinearHead {
 public:
  struct Tape {
    Tensor<T> input;
  };

  LinearHead(std::size_t in_dim, std::size_t out_dim, Rng& rng);
  LinearHead(std::size_t in_dim, std::size_t out_dim, ParamStore<T> params);
  // Zero weights and biases.
  static LinearHead zeros(std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

  Tensor<T> forward(const Tensor<T>& x, Tape* tape = nullptr) const;
  Tensor<T> backward(const Tape& tape, const Tensor<T>& dy);

  template <typename U>
  LinearHead<U> cast() const {
    return LinearHead<U>(in_dim_, out_dim_, params_.template cast<U>());
  }

 private:
  LinearHead(std::size_t in_dim, std::size_t out_dim);

  std::size_t in_dim_;
  std::size_t out_dim_;
  ParamStore<T> params_;
};

template <typename T>
using ClassifierHead = LinearHead<T>;
template <typename T>
using ProbeHead = LinearHead<T>;

struct DecoderConfig {
  EncoderConfig encoder;
  // 0 for the autoencoder; |charset| for character-conditional decoding.
  std::size_t n_chars = 0;
  // Reserved for attention / instance-norm blocks; must stay false.
  bool attention = false;

  bool conditional() const noexcept { return n_chars > 0; }
  std::size_t input_dim() const { return static_cast<std::size_t>(encoder.feat_dim) + n_chars; }
  void validate() const;
  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);
};

// Linear to the encoder's last feature map, then 4x4 stride-2 transposed
// convolutions mirroring the encoder channels back to one sigmoid channel.
template <typename T>
class Decoder {
 public:
  struct Tape {
    std::size_t batch = 0;
    Tensor<T> input;
    Tensor<T> fc_out;                // B x (C0*s0*s0), post-ReLU
    std::vector<Tensor<T>> inputs;   // channel-major input of each tconv stage
    std::vector<Tensor<T>> outputs;  // post-activation output of each stage
  };

  Decoder(const DecoderConfig& config, Rng& rng);
  Decoder(const DecoderConfig& config, ParamStore<T> params);

  const DecoderConfig& config() const noexcept { return config_; }
  ParamStore<T>& params() noexcept { return params_; }
  const ParamStore<T>& params() const noexcept { return params_; }

  // x: B x input_dim (conditional inputs carry the one-hot in the trailing
  // n_chars columns). Returns B x H x W in [0, 1].
  Tensor<T> forward(const Tensor<T>& x, Tape* tape = nullptr) const;
  // Returns d(loss)/d(x).
  Tensor<T> backward(const Tape& tape, const Tensor<T>& dout);

  template <typename U>
  Decoder<U> cast() const {
    return Decoder<U>(config_, params_.template cast<U>());
  }

 private:
  DecoderConfig config_;
  ParamStore<T> params_;
};

// Stacks images into a B x size x size tensor. Throws ShapeMismatch when an
// image has a different size.
template <typename T>
Tensor<T> images_to_tensor(std::span<const glyphset::GlyphImage> images, int size);

template <typename T>
Tensor<T> encode(const Encoder<T>& model, std::span<const glyphset::GlyphImage> batch);
template <typename T>
Tensor<T> project(const ProjectionHead<T>& head, const Tensor<T>& fhat);
template <typename T>
Tensor<T> classify(const LinearHead<T>& head, const Tensor<T>& fhat);
// Concatenates [fhat | char_onehot] when given. ModeMismatch if the one-hot
// presence disagrees with the decoder mode or a row is not a valid one-hot.
template <typename T>
Tensor<T> decode(const Decoder<T>& model, const Tensor<T>& fhat, const Tensor<T>* char_onehot = nullptr);

// Row n gets a one at column index[n].
template <typename T>
Tensor<T> one_hot(std::span<const std::size_t> index, std::size_t width);

}  // namespace glyphembed::nn
