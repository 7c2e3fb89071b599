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

#include "glyphembed/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "glyphembed/error.hpp"
#include "glyphembed/eval/embedding_table.hpp"
#include "glyphembed/eval/retrieval.hpp"
#include "glyphembed/train/adam.hpp"

namespace glyphembed::train {

using glyphset::GlyphDataset;
using nn::Tensor;

namespace {

constexpr std::pair<Objective, std::string_view> kObjectiveNames[] = {
    {Objective::PairedGlyph, "paired_glyph"},     {Objective::Classification, "classification"},
    {Objective::Autoencoder, "autoencoder"},      {Objective::StyleTransfer, "style_transfer"},
    {Objective::Triplet, "triplet"},
};

}  // namespace

Objective objective_from_string(std::string_view s) {
  for (const auto& [o, name] : kObjectiveNames) {
    if (name == s) return o;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown objective '" + std::string(s) + "'");
}

std::string_view to_string(Objective o) {
  for (const auto& [obj, name] : kObjectiveNames) {
    if (obj == o) return name;
  }
  return "unknown";
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); };
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (steps == 0) fail("steps must be positive");
  if (!(tau > 0) || !std::isfinite(tau)) fail("tau must be positive");
  if (!(margin >= 0)) fail("margin must be non-negative");
  if (n_fonts_per_batch < 2) fail("n_fonts_per_batch must be at least 2");
  if (!(crop.scale_lo > 0 && crop.scale_lo <= crop.scale_hi && crop.scale_hi <= 1.0)) {
    fail("crop scale range must satisfy 0 < lo <= hi <= 1");
  }
  if (!(crop.aspect_lo > 0 && crop.aspect_lo <= crop.aspect_hi)) fail("crop aspect range must satisfy 0 < lo <= hi");
  encoder.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"objective", to_string(objective)},
          {"tau", tau},
          {"learning_rate", learning_rate},
          {"n_fonts_per_batch", n_fonts_per_batch},
          {"steps", steps},
          {"seed", seed},
          {"input_size", encoder.input_size},
          {"channels", encoder.channels},
          {"feat_dim", encoder.feat_dim},
          {"denominator", objectives::to_string(denominator)},
          {"margin", margin},
          {"augmentation", augment},
          {"crop_scale", {crop.scale_lo, crop.scale_hi}},
          {"crop_aspect", {crop.aspect_lo, crop.aspect_hi}},
          {"eval_every", eval_every},
          {"log_every", log_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"objective", "tau",          "learning_rate", "n_fonts_per_batch",
                                           "steps",     "seed",         "input_size",    "channels",
                                           "feat_dim",  "denominator",  "margin",        "augmentation",
                                           "crop_scale", "crop_aspect", "eval_every",    "log_every"};
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "train config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorCode::ConfigInvalid, "unknown train config key '" + key + "'");
  }
  TrainConfig c;
  try {
    if (j.contains("objective")) c.objective = objective_from_string(j["objective"].get<std::string>());
    c.tau = j.value("tau", c.tau);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.n_fonts_per_batch = j.value("n_fonts_per_batch", c.n_fonts_per_batch);
    c.steps = j.value("steps", c.steps);
    c.seed = j.value("seed", c.seed);
    c.encoder.input_size = j.value("input_size", c.encoder.input_size);
    c.encoder.channels = j.value("channels", c.encoder.channels);
    c.encoder.feat_dim = j.value("feat_dim", c.encoder.feat_dim);
    if (j.contains("denominator")) {
      c.denominator = objectives::denominator_from_string(j["denominator"].get<std::string>());
    }
    c.margin = j.value("margin", c.margin);
    c.augment = j.value("augmentation", c.augment);
    if (j.contains("crop_scale")) {
      const auto r = j["crop_scale"].get<std::vector<double>>();
      if (r.size() != 2) throw Error(ErrorCode::ConfigInvalid, "crop_scale must be [lo, hi]");
      c.crop.scale_lo = r[0];
      c.crop.scale_hi = r[1];
    }
    if (j.contains("crop_aspect")) {
      const auto r = j["crop_aspect"].get<std::vector<double>>();
      if (r.size() != 2) throw Error(ErrorCode::ConfigInvalid, "crop_aspect must be [lo, hi]");
      c.crop.aspect_lo = r[0];
      c.crop.aspect_hi = r[1];
    }
    c.eval_every = j.value("eval_every", c.eval_every);
    c.log_every = j.value("log_every", c.log_every);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json LogRecord::to_json() const {
  nlohmann::json j{{"step", step}, {"loss", loss}};
  if (macc) j["macc"] = *macc;
  j["seconds"] = seconds;
  return j;
}

namespace {

std::string head_kind(Objective o) {
  switch (o) {
    case Objective::PairedGlyph:
    case Objective::Triplet:
      return "projection";
    case Objective::Classification:
      return "classifier";
    case Objective::Autoencoder:
      return "decoder";
    case Objective::StyleTransfer:
      return "conditional_decoder";
  }
  return "none";
}

}  // namespace

struct Trainer::Impl {
  const GlyphDataset* train;
  const GlyphDataset* val;
  TrainConfig cfg;
  nn::Encoder<float> enc;
  AdamState<float> enc_adam;
  std::optional<nn::ProjectionHead<float>> proj;
  std::optional<nn::LinearHead<float>> cls;
  std::optional<nn::Decoder<float>> dec;
  AdamState<float> head_adam;
  Rng rng;
  std::uint64_t t = 0;

  Impl(const GlyphDataset& tr, const GlyphDataset* va, const TrainConfig& config, Rng& init)
      : train(&tr), val(va), cfg(config), enc(config.encoder, init), rng(Rng::derive(config.seed, 1)) {
    switch (cfg.objective) {
      case Objective::PairedGlyph:
      case Objective::Triplet:
        proj.emplace(static_cast<std::size_t>(cfg.encoder.feat_dim), init);
        break;
      case Objective::Classification:
        cls.emplace(static_cast<std::size_t>(cfg.encoder.feat_dim), tr.num_fonts(), init);
        break;
      case Objective::Autoencoder:
        dec.emplace(nn::DecoderConfig{cfg.encoder, 0, false}, init);
        break;
      case Objective::StyleTransfer:
        dec.emplace(nn::DecoderConfig{cfg.encoder, tr.charset().size(), false}, init);
        break;
    }
    enc_adam = AdamState<float>(enc.params());
    head_adam = AdamState<float>(head_params());
  }

  nn::ParamStore<float>& head_params() {
    if (proj) return proj->params();
    if (cls) return cls->params();
    return dec->params();
  }
  const nn::ParamStore<float>& head_params() const { return const_cast<Impl*>(this)->head_params(); }

  nn::DecoderConfig decoder_config() const { return dec->config(); }

  nlohmann::json config_json() const {
    nlohmann::json j{{"train", cfg.to_json()}, {"encoder", cfg.encoder.to_json()}, {"head", head_kind(cfg.objective)}};
    if (cls) j["n_classes"] = cls->out_dim();
    if (dec) j["decoder"] = dec->config().to_json();
    return j;
  }

  double step() {
    const std::size_t n = cfg.n_fonts_per_batch;
    auto draw = glyphset::sample_minibatch(*train, n, rng);
    if (cfg.augmentation()) {
      for (auto& img : draw.images) img = glyphset::random_resized_crop(img, rng, cfg.crop);
    }
    const auto x = nn::images_to_tensor<float>(draw.images, train->size());
    enc.params().zero_grad();
    head_params().zero_grad();

    nn::Encoder<float>::Tape etape;
    const auto fhat = enc.forward(x, &etape);
    Tensor<float> dfhat;
    double loss = 0;
    switch (cfg.objective) {
      case Objective::PairedGlyph:
      case Objective::Triplet: {
        nn::ProjectionHead<float>::Tape htape;
        const auto z = proj->forward(fhat, &htape);
        Tensor<float> dz;
        loss = cfg.objective == Objective::PairedGlyph
                   ? objectives::paired_glyph_loss(z, cfg.tau, cfg.denominator, &dz).value
                   : objectives::batch_triplet_loss(z, cfg.margin, &dz).value;
        dfhat = proj->backward(htape, dz);
        break;
      }
      case Objective::Classification: {
        std::vector<std::size_t> labels;
        for (const auto& e : draw.entries) {
          labels.push_back(e.font);
          labels.push_back(e.font);
        }
        nn::LinearHead<float>::Tape htape;
        const auto logits = cls->forward(fhat, &htape);
        Tensor<float> dlogits;
        loss = objectives::classification_loss(logits, labels, &dlogits).value;
        dfhat = cls->backward(htape, dlogits);
        break;
      }
      case Objective::Autoencoder: {
        nn::Decoder<float>::Tape dtape;
        const auto out = dec->forward(fhat, &dtape);
        Tensor<float> dout;
        loss = objectives::reconstruction_loss(out, x, &dout).value;
        dfhat = dec->backward(dtape, dout);
        break;
      }
      case Objective::StyleTransfer: {
        const std::size_t n_chars = train->charset().size();
        std::vector<std::size_t> targets;
        std::vector<glyphset::GlyphImage> target_images;
        for (std::size_t i = 0; i < draw.images.size(); ++i) {
          const std::size_t cj = rng.uniform_index(n_chars);
          targets.push_back(cj);
          target_images.push_back(train->image(draw.entries[i / 2].font, cj));
        }
        const auto onehot = nn::one_hot<float>(targets, n_chars);
        const std::size_t feat = fhat.dim(1), rows = fhat.dim(0);
        Tensor<float> input({rows, feat + n_chars});
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(fhat.data() + r * feat, feat, input.data() + r * (feat + n_chars));
          std::copy_n(onehot.data() + r * n_chars, n_chars, input.data() + r * (feat + n_chars) + feat);
        }
        nn::Decoder<float>::Tape dtape;
        const auto out = dec->forward(input, &dtape);
        const auto target = nn::images_to_tensor<float>(target_images, train->size());
        Tensor<float> dout;
        loss = objectives::reconstruction_loss(out, target, &dout).value;
        const auto dinput = dec->backward(dtape, dout);
        dfhat = Tensor<float>({rows, feat});
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(dinput.data() + r * (feat + n_chars), feat, dfhat.data() + r * feat);
        }
        break;
      }
    }
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite at step " + std::to_string(t + 1));
    }
    enc.backward(etape, dfhat);
    adam_step(enc.params(), enc_adam, cfg.learning_rate);
    adam_step(head_params(), head_adam, cfg.learning_rate);
    ++t;
    return loss;
  }
};

Trainer::Trainer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

namespace {

void check_dataset(const GlyphDataset& train, const GlyphDataset* val, const TrainConfig& config) {
  config.validate();
  if (train.size() != config.encoder.input_size) {
    throw Error(ErrorCode::ConfigInvalid, "dataset image size " + std::to_string(train.size()) +
                                              " differs from encoder input_size " +
                                              std::to_string(config.encoder.input_size));
  }
  if (train.num_fonts() < config.n_fonts_per_batch) {
    throw Error(ErrorCode::ConfigInvalid, "training set has " + std::to_string(train.num_fonts()) +
                                              " fonts, fewer than n_fonts_per_batch=" +
                                              std::to_string(config.n_fonts_per_batch));
  }
  if (train.charset().size() < 2) throw Error(ErrorCode::ConfigInvalid, "training charset needs two characters");
  if (val && (val->size() != train.size() || val->charset().size() < 2)) {
    throw Error(ErrorCode::ConfigInvalid, "validation set must match the image size and hold two characters");
  }
}

}  // namespace

Trainer::Trainer(const GlyphDataset& train, const GlyphDataset* val, const TrainConfig& config) {
  check_dataset(train, val, config);
  Rng init = Rng::derive(config.seed, 0);
  impl_ = std::make_unique<Impl>(train, val, config, init);
}

Trainer Trainer::resume(const nn::Checkpoint& ckpt, const GlyphDataset& train, const GlyphDataset* val,
                        const TrainConfig& config) {
  check_dataset(train, val, config);
  const auto& meta = ckpt.metadata;
  const std::string objective = meta.value("objective", std::string());
  if (objective != to_string(config.objective)) {
    throw Error(ErrorCode::VersionMismatch, "checkpoint objective '" + objective + "' differs from '" +
                                                std::string(to_string(config.objective)) + "'");
  }
  if (!ckpt.config.contains("encoder") || nn::EncoderConfig::from_json(ckpt.config["encoder"]) != config.encoder) {
    throw Error(ErrorCode::VersionMismatch, "checkpoint encoder architecture differs from the config");
  }
  Rng init = Rng::derive(config.seed, 0);
  auto impl = std::make_unique<Impl>(train, val, config, init);
  try {
    impl->enc = nn::Encoder<float>(config.encoder, ckpt.params("encoder."));
    auto head = ckpt.params("head.");
    if (impl->proj) impl->proj.emplace(impl->proj->feat_dim(), std::move(head));
    if (impl->cls) impl->cls.emplace(impl->cls->in_dim(), impl->cls->out_dim(), std::move(head));
    if (impl->dec) impl->dec.emplace(impl->dec->config(), std::move(head));
  } catch (const Error& e) {
    throw Error(ErrorCode::VersionMismatch, std::string("checkpoint does not fit the configured models: ") + e.what());
  }
  auto restore = [&](AdamState<float>& state, const nn::ParamStore<float>& params, const std::string& prefix) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto* m = ckpt.find("adam.m." + prefix + params[i].name);
      const auto* v = ckpt.find("adam.v." + prefix + params[i].name);
      if (!m || !v || m->shape != params[i].value.shape || v->shape != params[i].value.shape) {
        throw Error(ErrorCode::VersionMismatch, "checkpoint lacks optimizer state for " + prefix + params[i].name);
      }
      state.m[i] = *m;
      state.v[i] = *v;
    }
  };
  restore(impl->enc_adam, impl->enc.params(), "encoder.");
  restore(impl->head_adam, impl->head_params(), "head.");
  try {
    impl->t = meta.at("step").get<std::uint64_t>();
    impl->enc_adam.t = impl->head_adam.t = meta.at("adam_t").get<std::uint64_t>();
    impl->rng.set_state(meta.at("rng_state").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("checkpoint metadata: ") + e.what());
  }
  return Trainer(std::move(impl));
}

double Trainer::step() { return impl_->step(); }

double Trainer::validate() const {
  if (!impl_->val) throw Error(ErrorCode::ConfigInvalid, "no validation set");
  const auto table = eval::embed_all(impl_->enc, *impl_->val);
  return eval::retrieval_macc(table, impl_->val->charset()).macc;
}

std::uint64_t Trainer::steps_done() const noexcept { return impl_->t; }
const TrainConfig& Trainer::config() const noexcept { return impl_->cfg; }
const nn::Encoder<float>& Trainer::encoder() const { return impl_->enc; }

nn::Checkpoint Trainer::checkpoint() const {
  const auto& im = *impl_;
  nn::Checkpoint c;
  c.kind = "encoder+" + head_kind(im.cfg.objective);
  c.config = im.config_json();
  std::vector<std::string> cps;
  for (const auto cp : im.train->charset().codepoints()) cps.push_back(glyphset::codepoint_hex(cp));
  c.metadata = {{"step", im.t},
                {"adam_t", im.enc_adam.t},
                {"objective", to_string(im.cfg.objective)},
                {"tau", im.cfg.tau},
                {"seed", im.cfg.seed},
                {"rng_state", im.rng.state()},
                {"dataset",
                 {{"charset", im.train->charset().id()},
                  {"codepoints", cps},
                  {"size", im.train->size()},
                  {"train_fonts", im.train->font_ids()}}}};
  c.add_params("encoder.", im.enc.params());
  c.add_params("head.", im.head_params());
  auto add_moments = [&](const AdamState<float>& state, const nn::ParamStore<float>& params,
                         const std::string& prefix) {
    for (std::size_t i = 0; i < params.size(); ++i) c.tensors.emplace_back("adam.m." + prefix + params[i].name, state.m[i]);
    for (std::size_t i = 0; i < params.size(); ++i) c.tensors.emplace_back("adam.v." + prefix + params[i].name, state.v[i]);
  };
  add_moments(im.enc_adam, im.enc.params(), "encoder.");
  add_moments(im.head_adam, im.head_params(), "head.");
  return c;
}

TrainResult Trainer::run(std::size_t steps, const TrainOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  TrainResult result;
  auto& report = result.report;
  const auto& cfg = impl_->cfg;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double loss = step();
    const std::size_t t = impl_->t;
    report.losses.emplace_back(t, loss);
    std::optional<double> macc;
    if (impl_->val && cfg.eval_every > 0 && (t % cfg.eval_every == 0 || i == steps)) {
      macc = validate();
      report.val_macc.emplace_back(t, *macc);
      if (!report.best_step || *macc > report.best_macc) {
        report.best_step = t;
        report.best_macc = *macc;
        result.best = checkpoint();
        result.best->metadata["val_macc"] = *macc;
      }
    }
    const bool log_now = (cfg.log_every > 0 && t % cfg.log_every == 0) || macc || i == steps;
    if (log_now && (options.log || options.on_record)) {
      LogRecord rec{t, loss, macc, std::chrono::duration<double>(clock::now() - start).count()};
      if (options.log) *options.log << rec.to_json().dump() << '\n' << std::flush;
      if (options.on_record) options.on_record(rec);
    }
  }
  report.seconds = std::chrono::duration<double>(clock::now() - start).count();
  result.checkpoint = checkpoint();
  return result;
}

TrainResult train(const GlyphDataset& train, const GlyphDataset* val, const TrainConfig& config,
                  const TrainOptions& options) {
  Trainer trainer(train, val, config);
  return trainer.run(config.steps, options);
}

TrainResult resume(const nn::Checkpoint& ckpt, const GlyphDataset& train, const GlyphDataset* val,
                   const TrainConfig& config, std::size_t extra_steps, const TrainOptions& options) {
  auto trainer = Trainer::resume(ckpt, train, val, config);
  return trainer.run(extra_steps, options);
}

nn::Encoder<float> encoder_from_checkpoint(const nn::Checkpoint& ckpt) {
  if (!ckpt.config.contains("encoder")) throw Error(ErrorCode::Corrupt, "checkpoint has no encoder config");
  return nn::Encoder<float>(nn::EncoderConfig::from_json(ckpt.config["encoder"]), ckpt.params("encoder."));
}

std::string checkpoint_id(const nn::Checkpoint& ckpt) {
  const auto& m = ckpt.metadata;
  return m.value("objective", std::string("model")) + "@" + std::to_string(m.value("step", std::uint64_t{0})) + "/" +
         std::to_string(m.value("seed", std::uint64_t{0}));
}

}  // namespace glyphembed::train
