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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "glyphembed/eval/retrieval.hpp"
#include "glyphembed/index/font_index.hpp"
#include "glyphembed/nn/models.hpp"
#include "glyphembed/objectives/losses.hpp"
#include "glyphembed/rng.hpp"

namespace ge = glyphembed;

namespace {

ge::eval::EmbeddingTable random_table(std::size_t n_fonts, std::size_t n_chars, std::size_t dim) {
  std::vector<char32_t> cps;
  for (std::size_t i = 0; i < n_chars; ++i) cps.push_back(U'A' + static_cast<char32_t>(i));
  ge::eval::EmbeddingTable t;
  t.charset = ge::glyphset::CharSet("bench", cps);
  t.feat_dim = dim;
  ge::Rng rng(3);
  for (std::size_t f = 0; f < n_fonts; ++f) t.font_ids.push_back("font" + std::to_string(f));
  t.values.resize(n_fonts * n_chars * dim);
  for (auto& v : t.values) v = static_cast<float>(rng.normal());
  return t;
}

// Encoder forward on a batch of 64 px glyphs; range(0) is the batch size.
void BM_EncoderForward(benchmark::State& state) {
  ge::Rng rng(1);
  ge::nn::EncoderConfig cfg;
  const ge::nn::Encoder<float> enc(cfg, rng);
  const auto b = static_cast<std::size_t>(state.range(0));
  ge::nn::Tensor<float> x({b, static_cast<std::size_t>(cfg.input_size), static_cast<std::size_t>(cfg.input_size)});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform01());
  for (auto _ : state) benchmark::DoNotOptimize(enc.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EncoderTrainStep(benchmark::State& state) {
  ge::Rng rng(1);
  ge::nn::EncoderConfig cfg;
  ge::nn::Encoder<float> enc(cfg, rng);
  const std::size_t b = 32;
  ge::nn::Tensor<float> x({b, static_cast<std::size_t>(cfg.input_size), static_cast<std::size_t>(cfg.input_size)});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform01());
  ge::nn::Tensor<float> dfeat({b, static_cast<std::size_t>(cfg.feat_dim)});
  dfeat.fill(1e-3f);
  for (auto _ : state) {
    typename ge::nn::Encoder<float>::Tape tape;
    benchmark::DoNotOptimize(enc.forward(x, &tape));
    enc.backward(tape, dfeat);
  }
}
BENCHMARK(BM_EncoderTrainStep)->Unit(benchmark::kMillisecond);

void BM_PairedGlyphLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ge::Rng rng(2);
  ge::nn::Tensor<float> z({2 * n, 70});
  for (auto& v : z.values) v = static_cast<float>(rng.normal());
  ge::nn::Tensor<float> dz;
  for (auto _ : state) benchmark::DoNotOptimize(ge::objectives::paired_glyph_loss(z, 0.1, {}, &dz));
}
BENCHMARK(BM_PairedGlyphLoss)->Arg(16)->Arg(64);

void BM_RetrievalMacc(benchmark::State& state) {
  const auto t = random_table(static_cast<std::size_t>(state.range(0)), 26, 128);
  for (auto _ : state) benchmark::DoNotOptimize(ge::eval::retrieval_macc(t, t.charset));
}
BENCHMARK(BM_RetrievalMacc)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_IndexQuery(benchmark::State& state) {
  const auto idx = ge::index::build_index(random_table(static_cast<std::size_t>(state.range(0)), 26, 128),
                                          ge::eval::Aggregation::Mean);
  const auto mode = state.range(1) ? ge::index::QueryMode::Aggregate : ge::index::QueryMode::PerGlyph;
  const auto probe = idx.glyphs.vec(0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(ge::index::query(idx, probe, 10, mode));
}
BENCHMARK(BM_IndexQuery)->Args({1000, 0})->Args({1000, 1});

}  // namespace

BENCHMARK_MAIN();
