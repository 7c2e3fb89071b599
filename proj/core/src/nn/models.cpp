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

#include "glyphembed/nn/models.hpp"

#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed::nn {

std::vector<std::size_t> EncoderConfig::stage_channels() const {
  std::vector<std::size_t> out(channels.begin(), channels.end());
  out.push_back(static_cast<std::size_t>(feat_dim));
  return out;
}

void EncoderConfig::validate() const {
  if (feat_dim <= 0) throw Error(ErrorCode::ConfigInvalid, "feat_dim must be positive");
  for (const int c : channels) {
    if (c <= 0) throw Error(ErrorCode::ConfigInvalid, "channel counts must be positive");
  }
  if (input_size <= 0 || stages() > 16) throw Error(ErrorCode::ConfigInvalid, "invalid input_size or stage count");
  const int factor = 1 << stages();
  if (input_size % factor != 0) {
    throw Error(ErrorCode::ConfigInvalid, "input_size " + std::to_string(input_size) + " is not divisible by 2^" +
                                              std::to_string(stages()));
  }
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"input_size", input_size}, {"channels", channels}, {"feat_dim", feat_dim}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  try {
    c.input_size = j.value("input_size", c.input_size);
    c.channels = j.value("channels", c.channels);
    c.feat_dim = j.value("feat_dim", c.feat_dim);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

void DecoderConfig::validate() const {
  encoder.validate();
  if (attention) throw Error(ErrorCode::ConfigInvalid, "attention blocks are not available in this decoder");
}

nlohmann::json DecoderConfig::to_json() const {
  return {{"encoder", encoder.to_json()}, {"n_chars", n_chars}, {"attention", attention}};
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  DecoderConfig c;
  try {
    c.encoder = EncoderConfig::from_json(j.at("encoder"));
    c.n_chars = j.value("n_chars", std::size_t{0});
    c.attention = j.value("attention", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("decoder config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

template <typename T>
void adopt(ParamStore<T>& fresh, ParamStore<T>&& given, const char* model) {
  if (given.size() != fresh.size()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(model) + ": expected " + std::to_string(fresh.size()) +
                                              " parameter tensors, got " + std::to_string(given.size()));
  }
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const auto j = given.find(fresh[i].name);
    if (!j) throw Error(ErrorCode::ShapeMismatch, std::string(model) + ": missing parameter " + fresh[i].name);
    auto& src = given[*j];
    require_shape(src.value, fresh[i].value.shape, fresh[i].name.c_str());
    fresh[i].value = std::move(src.value);
  }
}

std::string indexed(const char* prefix, std::size_t i, const char* suffix) {
  return prefix + std::to_string(i) + suffix;
}

}  // namespace

// ---- Encoder ----

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  std::size_t in = 1;
  const auto chans = config_.stage_channels();
  for (std::size_t s = 0; s < chans.size(); ++s) {
    const auto w = params_.add(indexed("conv", s, ".weight"), {chans[s], in, 3, 3});
    params_.add(indexed("conv", s, ".bias"), {chans[s]});
    params_.kaiming_uniform(w, in * 9, rng);
    in = chans[s];
  }
}

template <typename T>
Encoder<T>::Encoder(const EncoderConfig& config, ParamStore<T> params) : config_(config) {
  Rng unused(0);
  ParamStore<T> fresh = Encoder(config, unused).params_;
  adopt(fresh, std::move(params), "encoder");
  params_ = std::move(fresh);
}

template <typename T>
Tensor<T> Encoder<T>::forward(const Tensor<T>& images, Tape* tape) const {
  const auto size = static_cast<std::size_t>(config_.input_size);
  if (images.rank() != 3 || images.dim(1) != size || images.dim(2) != size) {
    throw Error(ErrorCode::ShapeMismatch,
                "encoder expects B x " + std::to_string(size) + " x " + std::to_string(size) + " images, got " +
                    shape_string(images.shape));
  }
  const std::size_t batch = images.dim(0);
  if (batch == 0) throw Error(ErrorCode::ShapeMismatch, "empty batch");
  Tensor<T> x({1, batch * size * size}, images.values);
  std::size_t h = size;
  std::size_t in = 1;
  if (tape) {
    tape->batch = batch;
    tape->cols.clear();
    tape->acts.clear();
  }
  for (std::size_t s = 0; s < config_.stages(); ++s) {
    const ConvGeometry g{in, batch, h, h, 3, 2, 1};
    Tensor<T> cols({g.col_rows(), g.col_cols()});
    im2col(x.data(), g, cols.data());
    Tensor<T> y;
    conv_forward(params_[2 * s].value, params_[2 * s + 1].value, cols, y);
    relu_inplace(y);
    in = static_cast<std::size_t>(y.rows());
    h = g.out_height();
    if (tape) {
      tape->cols.push_back(std::move(cols));
      tape->acts.push_back(y);
    }
    x = std::move(y);
  }
  return global_avg_pool(x, batch, h * h);
}

template <typename T>
void Encoder<T>::backward(const Tape& tape, const Tensor<T>& dfeat) {
  const std::size_t batch = tape.batch;
  const auto chans = config_.stage_channels();
  require_shape(dfeat, {batch, chans.back()}, "encoder backward");
  std::size_t h = config_.final_spatial();
  Tensor<T> d = global_avg_pool_backward(dfeat, chans.back(), batch, h * h);
  for (std::size_t s = config_.stages(); s-- > 0;) {
    relu_backward_inplace(tape.acts[s], d);
    Tensor<T> dcols;
    conv_backward(params_[2 * s].value, tape.cols[s], d, params_[2 * s].grad, params_[2 * s + 1].grad, dcols);
    if (s == 0) break;
    const std::size_t in = chans[s - 1];
    const ConvGeometry g{in, batch, 2 * h, 2 * h, 3, 2, 1};
    Tensor<T> dx({in, batch * 4 * h * h});
    col2im(dcols.data(), g, dx.data());
    d = std::move(dx);
    h *= 2;
  }
}

// ---- ProjectionHead ----

template <typename T>
ProjectionHead<T>::ProjectionHead(std::size_t feat_dim, Rng& rng) : feat_dim_(feat_dim) {
  const auto w1 = params_.add("fc1.weight", {feat_dim, feat_dim});
  params_.add("fc1.bias", {feat_dim});
  const auto w2 = params_.add("fc2.weight", {kProjectionDim, feat_dim});
  params_.add("fc2.bias", {kProjectionDim});
  params_.kaiming_uniform(w1, feat_dim, rng);
  params_.kaiming_uniform(w2, feat_dim, rng);
}

template <typename T>
ProjectionHead<T>::ProjectionHead(std::size_t feat_dim, ParamStore<T> params) : feat_dim_(feat_dim) {
  Rng unused(0);
  ParamStore<T> fresh = ProjectionHead(feat_dim, unused).params_;
  adopt(fresh, std::move(params), "projection head");
  params_ = std::move(fresh);
}

template <typename T>
Tensor<T> ProjectionHead<T>::forward(const Tensor<T>& fhat, Tape* tape) const {
  if (fhat.rank() != 2 || fhat.dim(1) != feat_dim_) {
    throw Error(ErrorCode::ShapeMismatch, "projection head expects B x " + std::to_string(feat_dim_) + ", got " +
                                              shape_string(fhat.shape));
  }
  Tensor<T> h;
  linear_forward(params_[0].value, params_[1].value, fhat, h);
  relu_inplace(h);
  Tensor<T> z;
  linear_forward(params_[2].value, params_[3].value, h, z);
  if (tape) {
    tape->input = fhat;
    tape->hidden = std::move(h);
  }
  return z;
}

template <typename T>
Tensor<T> ProjectionHead<T>::backward(const Tape& tape, const Tensor<T>& dz) {
  Tensor<T> dh;
  linear_backward(params_[2].value, tape.hidden, dz, params_[2].grad, params_[3].grad, &dh);
  relu_backward_inplace(tape.hidden, dh);
  Tensor<T> dx;
  linear_backward(params_[0].value, tape.input, dh, params_[0].grad, params_[1].grad, &dx);
  return dx;
}

// ---- LinearHead ----

template <typename T>
LinearHead<T>::LinearHead(std::size_t in_dim, std::size_t out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim == 0 || out_dim == 0) throw Error(ErrorCode::ConfigInvalid, "linear head dimensions must be positive");
  params_.add("fc.weight", {out_dim, in_dim});
  params_.add("fc.bias", {out_dim});
}

template <typename T>
LinearHead<T>::LinearHead(std::size_t in_dim, std::size_t out_dim, Rng& rng) : LinearHead(in_dim, out_dim) {
  params_.kaiming_uniform(0, in_dim, rng);
}

template <typename T>
LinearHead<T>::LinearHead(std::size_t in_dim, std::size_t out_dim, ParamStore<T> params)
    : LinearHead(in_dim, out_dim) {
  adopt(params_, std::move(params), "linear head");
}

template <typename T>
LinearHead<T> LinearHead<T>::zeros(std::size_t in_dim, std::size_t out_dim) {
  return LinearHead(in_dim, out_dim);
}

template <typename T>
Tensor<T> LinearHead<T>::forward(const Tensor<T>& x, Tape* tape) const {
  if (x.rank() != 2 || x.dim(1) != in_dim_) {
    throw Error(ErrorCode::ShapeMismatch,
                "linear head expects B x " + std::to_string(in_dim_) + ", got " + shape_string(x.shape));
  }
  Tensor<T> y;
  linear_forward(params_[0].value, params_[1].value, x, y);
  if (tape) tape->input = x;
  return y;
}

template <typename T>
Tensor<T> LinearHead<T>::backward(const Tape& tape, const Tensor<T>& dy) {
  Tensor<T> dx;
  linear_backward(params_[0].value, tape.input, dy, params_[0].grad, params_[1].grad, &dx);
  return dx;
}

// ---- Decoder ----

template <typename T>
Decoder<T>::Decoder(const DecoderConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  const auto chans = config_.encoder.stage_channels();
  const std::size_t s0 = config_.encoder.final_spatial();
  const std::size_t c0 = chans.back();
  const auto fc = params_.add("fc.weight", {c0 * s0 * s0, config_.input_dim()});
  params_.add("fc.bias", {c0 * s0 * s0});
  params_.kaiming_uniform(fc, config_.input_dim(), rng);
  std::size_t in = c0;
  for (std::size_t s = 0; s < chans.size(); ++s) {
    const std::size_t out = s + 1 < chans.size() ? chans[chans.size() - 2 - s] : 1;
    const auto w = params_.add(indexed("tconv", s, ".weight"), {in, out, 4, 4});
    params_.add(indexed("tconv", s, ".bias"), {out});
    params_.kaiming_uniform(w, in * 4, rng);
    in = out;
  }
}

template <typename T>
Decoder<T>::Decoder(const DecoderConfig& config, ParamStore<T> params) : config_(config) {
  Rng unused(0);
  ParamStore<T> fresh = Decoder(config, unused).params_;
  adopt(fresh, std::move(params), "decoder");
  params_ = std::move(fresh);
}

template <typename T>
Tensor<T> Decoder<T>::forward(const Tensor<T>& x, Tape* tape) const {
  if (x.rank() != 2 || x.dim(1) != config_.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "decoder expects B x " + std::to_string(config_.input_dim()) + ", got " +
                                              shape_string(x.shape));
  }
  const std::size_t batch = x.dim(0);
  if (config_.conditional()) {
    const std::size_t feat = static_cast<std::size_t>(config_.encoder.feat_dim);
    for (std::size_t b = 0; b < batch; ++b) {
      std::size_t ones = 0;
      for (std::size_t c = feat; c < config_.input_dim(); ++c) {
        const T v = x[b * config_.input_dim() + c];
        if (v == T(1)) {
          ++ones;
        } else if (v != T(0)) {
          ones = 2;
        }
      }
      if (ones != 1) throw Error(ErrorCode::ModeMismatch, "row " + std::to_string(b) + " is not a valid one-hot");
    }
  }
  const auto chans = config_.encoder.stage_channels();
  const std::size_t s0 = config_.encoder.final_spatial();
  const std::size_t c0 = chans.back();
  const std::size_t q0 = s0 * s0;

  Tensor<T> fc_out;
  linear_forward(params_[0].value, params_[1].value, x, fc_out);
  relu_inplace(fc_out);
  Tensor<T> cur({c0, batch * q0});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < c0; ++c) {
      std::copy_n(fc_out.data() + b * c0 * q0 + c * q0, q0, cur.data() + c * batch * q0 + b * q0);
    }
  }
  if (tape) {
    tape->batch = batch;
    tape->input = x;
    tape->fc_out = fc_out;
    tape->inputs.clear();
    tape->outputs.clear();
  }
  std::size_t h = s0;
  const std::size_t n_stages = chans.size();
  for (std::size_t s = 0; s < n_stages; ++s) {
    const auto& w = params_[2 + 2 * s].value;
    const auto& bias = params_[3 + 2 * s].value;
    const std::size_t out = w.dim(1);
    const ConvGeometry g{out, batch, 2 * h, 2 * h, 4, 2, 1};
    Tensor<T> cols({g.col_rows(), g.col_cols()});
    cols.matrix().noalias() = w.matrix().transpose() * cur.matrix();
    Tensor<T> y({out, batch * 4 * h * h});
    col2im(cols.data(), g, y.data());
    y.matrix().colwise() += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(bias.data(), out);
    if (s + 1 < n_stages) {
      relu_inplace(y);
    } else {
      sigmoid_inplace(y);
    }
    if (tape) {
      tape->inputs.push_back(std::move(cur));
      tape->outputs.push_back(y);
    }
    cur = std::move(y);
    h *= 2;
  }
  const auto size = static_cast<std::size_t>(config_.encoder.input_size);
  return Tensor<T>({batch, size, size}, std::move(cur.values));
}

template <typename T>
Tensor<T> Decoder<T>::backward(const Tape& tape, const Tensor<T>& dout) {
  const std::size_t batch = tape.batch;
  const auto size = static_cast<std::size_t>(config_.encoder.input_size);
  require_shape(dout, {batch, size, size}, "decoder backward");
  const auto chans = config_.encoder.stage_channels();
  const std::size_t n_stages = chans.size();
  Tensor<T> d({1, batch * size * size}, dout.values);
  const auto& y = tape.outputs.back();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (T(1) - y[i]);
  std::size_t h = size / 2;
  for (std::size_t s = n_stages; s-- > 0;) {
    if (s + 1 < n_stages) relu_backward_inplace(tape.outputs[s], d);
    auto& w = params_[2 + 2 * s];
    auto& bias = params_[3 + 2 * s];
    const std::size_t out = w.value.dim(1);
    add_row_sums(d, bias.grad.data());
    const ConvGeometry g{out, batch, 2 * h, 2 * h, 4, 2, 1};
    Tensor<T> dcols({g.col_rows(), g.col_cols()});
    im2col(d.data(), g, dcols.data());
    const auto& x = tape.inputs[s];
    w.grad.matrix().noalias() += x.matrix() * dcols.matrix().transpose();
    Tensor<T> dx({w.value.dim(0), batch * h * h});
    dx.matrix().noalias() = w.value.matrix() * dcols.matrix();
    d = std::move(dx);
    h /= 2;
  }
  const std::size_t c0 = chans.back();
  const std::size_t q0 = config_.encoder.final_spatial() * config_.encoder.final_spatial();
  Tensor<T> dfc({batch, c0 * q0});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < c0; ++c) {
      std::copy_n(d.data() + c * batch * q0 + b * q0, q0, dfc.data() + b * c0 * q0 + c * q0);
    }
  }
  relu_backward_inplace(tape.fc_out, dfc);
  Tensor<T> dx;
  linear_backward(params_[0].value, tape.input, dfc, params_[0].grad, params_[1].grad, &dx);
  return dx;
}

// ---- free functions ----

template <typename T>
Tensor<T> images_to_tensor(std::span<const glyphset::GlyphImage> images, int size) {
  const auto n = static_cast<std::size_t>(size);
  Tensor<T> out({images.size(), n, n});
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& g = images[i];
    if (g.size != size || g.pixels.size() != n * n) {
      throw Error(ErrorCode::ShapeMismatch, "image " + std::to_string(i) + " has size " + std::to_string(g.size) +
                                                ", expected " + std::to_string(size));
    }
    std::copy(g.pixels.begin(), g.pixels.end(), out.data() + i * n * n);
  }
  return out;
}

template <typename T>
Tensor<T> encode(const Encoder<T>& model, std::span<const glyphset::GlyphImage> batch) {
  return model.forward(images_to_tensor<T>(batch, model.config().input_size));
}

template <typename T>
Tensor<T> project(const ProjectionHead<T>& head, const Tensor<T>& fhat) {
  return head.forward(fhat);
}

template <typename T>
Tensor<T> classify(const LinearHead<T>& head, const Tensor<T>& fhat) {
  return head.forward(fhat);
}

template <typename T>
Tensor<T> decode(const Decoder<T>& model, const Tensor<T>& fhat, const Tensor<T>* char_onehot) {
  if (model.config().conditional() != (char_onehot != nullptr)) {
    throw Error(ErrorCode::ModeMismatch, model.config().conditional() ? "conditional decoder needs a character one-hot"
                                                                      : "autoencoder decoder takes no character input");
  }
  if (!char_onehot) return model.forward(fhat);
  if (fhat.rank() != 2 || char_onehot->rank() != 2 || fhat.dim(0) != char_onehot->dim(0)) {
    throw Error(ErrorCode::ShapeMismatch, "fhat and one-hot batch sizes differ");
  }
  const std::size_t batch = fhat.dim(0), a = fhat.dim(1), b = char_onehot->dim(1);
  Tensor<T> x({batch, a + b});
  for (std::size_t r = 0; r < batch; ++r) {
    std::copy_n(fhat.data() + r * a, a, x.data() + r * (a + b));
    std::copy_n(char_onehot->data() + r * b, b, x.data() + r * (a + b) + a);
  }
  return model.forward(x);
}

template <typename T>
Tensor<T> one_hot(std::span<const std::size_t> index, std::size_t width) {
  Tensor<T> out({index.size(), width});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= width) throw Error(ErrorCode::LabelOutOfRange, "one-hot index out of range");
    out[i * width + index[i]] = T(1);
  }
  return out;
}

#define GLYPHEMBED_INSTANTIATE_MODELS(T)                                                                  \
  template class Encoder<T>;                                                                             \
  template class ProjectionHead<T>;                                                                      \
  template class LinearHead<T>;                                                                          \
  template class Decoder<T>;                                                                             \
  template Tensor<T> images_to_tensor(std::span<const glyphset::GlyphImage>, int);                      \
  template Tensor<T> encode(const Encoder<T>&, std::span<const glyphset::GlyphImage>);                  \
  template Tensor<T> project(const ProjectionHead<T>&, const Tensor<T>&);                               \
  template Tensor<T> classify(const LinearHead<T>&, const Tensor<T>&);                                  \
  template Tensor<T> decode(const Decoder<T>&, const Tensor<T>&, const Tensor<T>*);                     \
  template Tensor<T> one_hot(std::span<const std::size_t>, std::size_t);

GLYPHEMBED_INSTANTIATE_MODELS(float)
GLYPHEMBED_INSTANTIATE_MODELS(double)
GLYPHEMBED_INSTANTIATE_MODELS(long double)

}  // namespace glyphembed::nn
