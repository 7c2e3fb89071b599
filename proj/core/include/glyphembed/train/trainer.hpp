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
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/glyphset/dataset.hpp"
#include "glyphembed/nn/checkpoint.hpp"
#include "glyphembed/nn/models.hpp"
#include "glyphembed/objectives/losses.hpp"

namespace glyphembed::train {

enum class Objective { PairedGlyph, Classification, Autoencoder, StyleTransfer, Triplet };
Objective objective_from_string(std::string_view s);
std::string_view to_string(Objective o);

struct TrainConfig {
  Objective objective = Objective::PairedGlyph;
  double tau = 0.1;
  double learning_rate = 2e-4;
  std::size_t n_fonts_per_batch = 16;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  nn::EncoderConfig encoder;
  objectives::Denominator denominator = objectives::Denominator::PerFont;
  double margin = 0.2;
  // Requested augmentation; only honored for the paired-glyph objective.
  bool augment = true;
  glyphset::CropParams crop;
  // Validation MACC every eval_every steps (0 disables); loss records are
  // written to the JSON-lines log every log_every steps.
  std::size_t eval_every = 200;
  std::size_t log_every = 10;

  bool augmentation() const noexcept { return augment && objective == Objective::PairedGlyph; }
  // Throws ConfigInvalid.
  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
};

struct LogRecord {
  std::size_t step = 0;
  double loss = 0.0;
  std::optional<double> macc;
  double seconds = 0.0;
  nlohmann::json to_json() const;
};

struct TrainReport {
  std::vector<std::pair<std::size_t, double>> losses;    // every step
  std::vector<std::pair<std::size_t, double>> val_macc;  // every probe
  std::optional<std::size_t> best_step;
  double best_macc = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  nn::Checkpoint checkpoint;           // state after the last step
  std::optional<nn::Checkpoint> best;  // highest validation MACC, when probed
  TrainReport report;
};

struct TrainOptions {
  std::ostream* log = nullptr;  // JSON-lines sink
  std::function<void(const LogRecord&)> on_record;
};

// Owns the models, optimizer state and sampling stream of one run.
class Trainer {
 public:
  // `val` may be null (no MACC probes). Throws ConfigInvalid when the dataset
  // cannot serve the objective.
  Trainer(const glyphset::GlyphDataset& train, const glyphset::GlyphDataset* val, const TrainConfig& config);
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  // Restores models, Adam moments, step counter and sampling stream. Throws
  // VersionMismatch if the checkpoint was trained with another objective or
  // architecture.
  static Trainer resume(const nn::Checkpoint& ckpt, const glyphset::GlyphDataset& train,
                        const glyphset::GlyphDataset* val, const TrainConfig& config);

  // One optimization step; returns the minibatch loss. Throws NonFiniteLoss.
  double step();
  // MACC of the current encoder on the validation set.
  double validate() const;
  std::uint64_t steps_done() const noexcept;
  const TrainConfig& config() const noexcept;
  const nn::Encoder<float>& encoder() const;
  nn::Checkpoint checkpoint() const;

  // Runs `steps` more steps with logging and best-checkpoint tracking.
  TrainResult run(std::size_t steps, const TrainOptions& options = {});

 private:
  struct Impl;
  explicit Trainer(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

TrainResult train(const glyphset::GlyphDataset& train, const glyphset::GlyphDataset* val, const TrainConfig& config,
                  const TrainOptions& options = {});
TrainResult resume(const nn::Checkpoint& ckpt, const glyphset::GlyphDataset& train, const glyphset::GlyphDataset* val,
                   const TrainConfig& config, std::size_t extra_steps, const TrainOptions& options = {});

// The encoder of any checkpoint written by the trainer.
nn::Encoder<float> encoder_from_checkpoint(const nn::Checkpoint& ckpt);
// Identifier used for index provenance: "<objective>@<step>/<seed>".
std::string checkpoint_id(const nn::Checkpoint& ckpt);

}  // namespace glyphembed::train
