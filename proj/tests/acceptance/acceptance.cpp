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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/error.hpp"
#include "glyphembed/eval/retrieval.hpp"
#include "glyphembed/index/font_index.hpp"
#include "glyphembed/iface/http_server.hpp"
#include "glyphembed/iface/service.hpp"
#include "glyphembed/nn/checkpoint.hpp"
#include "glyphembed/objectives/losses.hpp"
#include "glyphembed/train/trainer.hpp"
#include "grad_harness.hpp"
#include "test_support.hpp"

#include <httplib.h>

namespace ge = glyphembed;
using ge::glyphset::CharSet;
using ge::nn::Tensor;
using nlohmann::json;

namespace {

// Tolerances and budgets.
constexpr double kLossTol = 1e-9;
constexpr double kGrad64Tol = 1e-6;
constexpr double kGrad32Tol = 1e-3;
constexpr double kFdStep = 1e-5;
constexpr double kLossBudget = 1.0;
constexpr double kGradBudget = 120.0;
constexpr double kOracleBudget = 30.0;
constexpr double kTrainBudget = 45 * 60.0;
constexpr double kAeMargin = 0.15;
constexpr double kChanceFactorSame = 5.0;
constexpr double kChanceFactorCross = 3.0;
constexpr std::size_t kSteps = 3000;
constexpr std::size_t kValFonts = 12;
constexpr std::uint64_t kSeed = 2026;

// 2 ln 3 and 2 ln(1 + 2 e^-10), evaluated at 30 digits.
constexpr double kSymmetric = 2.19722457733621938279;
constexpr double kOrthogonal = 1.81591474934488892550e-4;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor<double> rows(std::size_t n, std::size_t d, std::vector<double> v) { return Tensor<double>({n, d}, std::move(v)); }

Tensor<double> randn(std::size_t n, std::size_t d, ge::Rng& rng) {
  Tensor<double> t({n, d});
  for (auto& v : t.values) v = rng.normal();
  return t;
}

// Rows of a unit-diagonal Gram matrix, by Cholesky.
Tensor<double> rows_from_gram(const std::vector<double>& s, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = s[i * n + j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = i == j ? std::sqrt(acc) : acc / l[j * n + j];
    }
  }
  return Tensor<double>({n, n}, std::move(l));
}

// Exhaustive double loop: query font q matches when no gallery font is closer
// and no lower-index font is equally close.
std::size_t oracle_matches(const ge::eval::EmbeddingTable& t, std::size_t ci, std::size_t cj) {
  const std::size_t n = t.num_fonts();
  std::size_t hits = 0;
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<double> d(n, 0.0);
    for (std::size_t g = 0; g < n; ++g) {
      const auto a = t.vec(q, ci);
      const auto b = t.vec(g, cj);
      for (std::size_t k = 0; k < t.feat_dim; ++k) {
        const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        d[g] += diff * diff;
      }
    }
    bool ok = true;
    for (std::size_t g = 0; g < n; ++g) {
      if (d[g] < d[q] || (d[g] == d[q] && g < q)) ok = false;
    }
    hits += ok;
  }
  return hits;
}

// Random orthogonal d x d matrix by Gram-Schmidt on Gaussian columns.
std::vector<double> random_orthogonal(std::size_t d, ge::Rng& rng) {
  std::vector<double> q(d * d);
  for (auto& v : q) v = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {
    double* row = q.data() + i * d;
    for (std::size_t j = 0; j < i; ++j) {
      const double* prev = q.data() + j * d;
      const double p = std::inner_product(row, row + d, prev, 0.0);
      for (std::size_t k = 0; k < d; ++k) row[k] -= p * prev[k];
    }
    const double norm = std::sqrt(std::inner_product(row, row + d, row, 0.0));
    for (std::size_t k = 0; k < d; ++k) row[k] /= norm;
  }
  return q;
}

ge::eval::EmbeddingTable transformed(const ge::eval::EmbeddingTable& t, const std::vector<double>& q) {
  auto out = t;
  const std::size_t d = t.feat_dim;
  for (std::size_t r = 0; r < t.values.size() / d; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += q[i * d + k] * t.values[r * d + k];
      out.values[r * d + i] = static_cast<float>(s);
    }
  }
  return out;
}

std::vector<std::size_t> all_matches(const ge::eval::EmbeddingTable& t) {
  std::vector<std::size_t> m;
  const auto& cs = t.charset;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (i != j) m.push_back(ge::eval::retrieval_matches(t, cs[i], cs[j]));
    }
  }
  return m;
}

// Shared state produced by the training runs.
struct Desk {
  ge::glyphset::GlyphDataset all;
  ge::glyphset::GlyphDataset train;
  ge::glyphset::GlyphDataset val;
  std::optional<ge::nn::Checkpoint> paired;
};

ge::train::TrainConfig desk_config(ge::train::Objective o) {
  ge::train::TrainConfig c;
  c.objective = o;
  c.steps = kSteps;
  c.seed = kSeed;
  c.eval_every = 500;
  c.log_every = 0;
  return c;
}

Outcome criterion1() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  using ge::objectives::paired_glyph_loss;
  const auto sym = rows(4, 2, {1, 0, 1, 0, 1, 0, 1, 0});
  const double v_sym = paired_glyph_loss(sym, 0.1).value;
  out.require(std::abs(v_sym - kSymmetric) < kLossTol, "symmetric " + fmt("%.15g", v_sym));
  const auto orth = rows(4, 2, {1, 0, 1, 0, 0, 1, 0, 1});
  const double v_orth = paired_glyph_loss(orth, 0.1).value;
  out.require(std::abs(v_orth - kOrthogonal) < kLossTol, "orthogonal " + fmt("%.10e", v_orth));
  const double t = seconds_since(t0);
  out.require(t < kLossBudget, fmt("%.3f s", t));
  return out;
}

Outcome criterion2() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  for (auto o : ge::testing::kAllGradObjectives) {
    const auto r = ge::testing::check_objective_gradients(o, kSeed, 12, kFdStep);
    out.require(r.fp64.max_rel_error < kGrad64Tol && r.fp32.max_rel_error < kGrad32Tol,
                ge::testing::to_string(o) + " fp64 " + fmt("%.2e", r.fp64.max_rel_error) + " fp32 " +
                    fmt("%.2e", r.fp32.max_rel_error));
  }
  const double t = seconds_since(t0);
  out.require(t < kGradBudget, fmt("%.1f s", t));
  return out;
}

Outcome criterion3() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto cs = CharSet::named("A-E");
  const CharSet query("A-B", {U'A', U'B'}), gallery("C-E", {U'C', U'D', U'E'});
  ge::Rng rng(kSeed);
  std::size_t bad = 0;
  for (int inst = 0; inst < 25; ++inst) {
    const auto t = ge::testing::random_table(20, cs, 8, rng);
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      for (std::size_t j = 0; j < cs.size(); ++j) {
        if (i == j) continue;
        const std::size_t expect = oracle_matches(t, i, j);
        bad += ge::eval::retrieval_matches(t, cs[i], cs[j]) != expect;
        bad += ge::eval::retrieval_acc(t, cs[i], cs[j]) != static_cast<double>(expect) / 20.0;
        sum += static_cast<double>(expect) / 20.0;
        ++pairs;
      }
    }
    bad += ge::eval::retrieval_macc(t, cs).macc != sum / static_cast<double>(pairs);
    double cross = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 2; j < 5; ++j) cross += static_cast<double>(oracle_matches(t, i, j)) / 20.0;
    }
    bad += ge::eval::cross_macc(t, query, gallery).macc != cross / 6.0;
  }
  out.require(bad == 0, std::to_string(bad) + " mismatches over 25 instances");
  const double t = seconds_since(t0);
  out.require(t < kOracleBudget, fmt("%.2f s", t));
  return out;
}

Outcome criterion4(Desk& desk) {
  Outcome out;
  const double chance = 1.0 / static_cast<double>(desk.val.num_fonts());
  out.require(desk.all.num_fonts() >= 30 && desk.val.num_fonts() >= 10,
              std::to_string(desk.all.num_fonts()) + " fonts, " + std::to_string(desk.val.num_fonts()) + " held out");
  double total = 0;
  std::vector<double> macc;
  for (auto o : {ge::train::Objective::PairedGlyph, ge::train::Objective::Classification,
                 ge::train::Objective::Autoencoder}) {
    const auto r = ge::train::train(desk.train, &desk.val, desk_config(o));
    total += r.report.seconds;
    macc.push_back(r.report.best_macc);
    std::printf("  %s best val MACC %.4f at step %zu (%.0f s)\n", std::string(ge::train::to_string(o)).c_str(),
                r.report.best_macc, r.report.best_step.value_or(0), r.report.seconds);
    std::fflush(stdout);
    if (o == ge::train::Objective::PairedGlyph) desk.paired = r.best ? *r.best : r.checkpoint;
  }
  out.require(macc[0] > macc[2] + kAeMargin, fmt("paired %.4f", macc[0]) + fmt(" > autoencoder %.4f + 0.15", macc[2]));
  out.require(macc[0] >= macc[1], fmt("paired >= classification %.4f", macc[1]));
  out.require(macc[0] > kChanceFactorSame * chance, fmt("paired > 5x chance %.4f", kChanceFactorSame * chance));
  out.require(total < kTrainBudget, fmt("%.0f s training", total));
  return out;
}

Outcome criterion5(const Desk& desk) {
  Outcome out;
  const auto am = CharSet::named("A-M"), nz = CharSet::named("N-Z");
  auto cfg = desk_config(ge::train::Objective::PairedGlyph);
  cfg.eval_every = 0;
  const auto r = ge::train::train(desk.train.restrict_charset(am), nullptr, cfg);
  const auto enc = ge::train::encoder_from_checkpoint(r.checkpoint);
  const auto table = ge::eval::embed_all(enc, desk.val);
  const double cross = ge::eval::cross_macc(table, nz, am).macc;
  const double chance = 1.0 / static_cast<double>(desk.val.num_fonts());
  out.require(cross > kChanceFactorCross * chance,
              fmt("cross MACC N-Z -> A-M %.4f", cross) + fmt(" > 3x chance %.4f", kChanceFactorCross * chance));
  out.require(r.report.seconds < kTrainBudget, fmt("%.0f s training", r.report.seconds));
  return out;
}

Outcome criterion6(const Desk& desk) {
  Outcome out;
  ge::testing::TempDir dir;
  const auto& ckpt = *desk.paired;
  const auto bytes = ge::nn::serialize_checkpoint(ckpt);
  ge::nn::save_checkpoint(ckpt, dir / "m.gemb");
  const auto loaded = ge::nn::load_checkpoint(dir / "m.gemb");
  out.require(ge::nn::serialize_checkpoint(loaded) == bytes && ge::nn::container::read_file(dir / "m.gemb") == bytes,
              "checkpoint bytes");
  bool same_tensors = loaded.tensors.size() == ckpt.tensors.size();
  for (std::size_t i = 0; same_tensors && i < ckpt.tensors.size(); ++i) {
    const auto& a = ckpt.tensors[i].second;
    const auto& b = loaded.tensors[i].second;
    same_tensors = ckpt.tensors[i].first == loaded.tensors[i].first && a.shape == b.shape &&
                   std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
  }
  out.require(same_tensors, "checkpoint tensors");

  const auto az = CharSet::named("A-Z");
  const auto before = ge::eval::embed_all(ge::train::encoder_from_checkpoint(ckpt), desk.val);
  const auto after = ge::eval::embed_all(ge::train::encoder_from_checkpoint(loaded), desk.val);
  const double m0 = ge::eval::retrieval_macc(before, az).macc;
  const double m1 = ge::eval::retrieval_macc(after, az).macc;
  out.require(m0 == m1, fmt("MACC %.4f", m0) + fmt(" -> %.4f", m1));

  const auto idx = ge::index::build_index(before, ge::eval::Aggregation::Mean, ge::train::checkpoint_id(ckpt));
  const auto ibytes = ge::index::serialize_index(idx);
  ge::index::save_index(idx, dir / "i.gidx");
  const auto back = ge::index::load_index(dir / "i.gidx");
  out.require(ge::index::serialize_index(back) == ibytes && ge::nn::container::read_file(dir / "i.gidx") == ibytes &&
                  back.glyphs.values == idx.glyphs.values && back.aggregates == idx.aggregates,
              "index bytes");
  bool same_rankings = true;
  for (std::size_t f = 0; f < idx.num_fonts(); ++f) {
    for (auto mode : {ge::index::QueryMode::PerGlyph, ge::index::QueryMode::Aggregate}) {
      const auto a = ge::index::query(idx, idx.glyphs.vec(f, 3), idx.num_fonts(), mode);
      const auto b = ge::index::query(back, back.glyphs.vec(f, 3), back.num_fonts(), mode);
      for (std::size_t r = 0; r < a.size(); ++r) {
        same_rankings = same_rankings && a[r].font == b[r].font && a[r].distance == b[r].distance &&
                        a[r].best_char == b[r].best_char;
      }
    }
  }
  out.require(same_rankings, "query rankings");
  return out;
}

Outcome criterion7(const Desk& desk) {
  Outcome out;
  std::vector<std::size_t> first20(20);
  std::iota(first20.begin(), first20.end(), 0);
  const auto ds = desk.all.subset_fonts(first20);
  const auto enc = ge::train::encoder_from_checkpoint(*desk.paired);
  const auto idx = ge::index::build_index(enc, ds, ge::eval::Aggregation::Mean, ge::train::checkpoint_id(*desk.paired));
  const ge::iface::Service service(idx, enc, {});
  ge::iface::HttpServer server(service, {"127.0.0.1", 0, {}});
  const int port = server.bind();
  std::thread loop([&] { server.listen(); });
  server.wait_until_ready();

  std::vector<std::string> requests;
  for (std::size_t f = 0; f < idx.num_fonts(); ++f) {
    for (char32_t c : idx.glyphs.charset.codepoints()) {
      requests.push_back(json{{"font_id", idx.font_ids()[f]}, {"char", ge::glyphset::codepoint_label(c)}}.dump());
    }
  }
  auto post = [&](httplib::Client& cli, const std::string& body) {
    auto r = cli.Post("/api/retrieve?k=5", body, "application/json");
    return r ? std::to_string(r->status) + " " + r->body : std::string("transport error");
  };

  httplib::Client cli("127.0.0.1", port);
  std::vector<std::string> serial;
  std::size_t self_hits = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    serial.push_back(post(cli, requests[i]));
    if (serial.back().rfind("200 ", 0) != 0) continue;
    const auto top = json::parse(serial.back().substr(4)).at("results").at(0);
    self_hits += top.at("font_id") == idx.font_ids()[i / idx.glyphs.charset.size()] && top.at("distance") == 0.0;
  }
  out.require(self_hits == requests.size(),
              std::to_string(self_hits) + "/" + std::to_string(requests.size()) + " glyphs rank their own font first");

  std::vector<std::size_t> mismatches(16, 0);
  std::vector<std::thread> storm;
  for (std::size_t t = 0; t < 16; ++t) {
    storm.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port);
      for (std::size_t k = 0; k < requests.size(); ++k) {
        const std::size_t i = (k + t * 37) % requests.size();
        mismatches[t] += post(c, requests[i]) != serial[i];
      }
    });
  }
  for (auto& th : storm) th.join();
  server.stop();
  loop.join();
  const auto bad = std::accumulate(mismatches.begin(), mismatches.end(), std::size_t{0});
  out.require(bad == 0, "16-way storm, " + std::to_string(bad) + " responses differ from serial");
  return out;
}

Outcome criterion8(const Desk& desk) {
  Outcome out;
  using ge::objectives::paired_glyph_loss;
  ge::Rng rng(kSeed);

  const std::size_t n_fonts = 6, d = 5;
  const auto z = randn(2 * n_fonts, d, rng);
  const double base = paired_glyph_loss(z, 0.1).value;
  double worst = 0;
  std::vector<std::size_t> perm(n_fonts);
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 20; ++t) {
    for (std::size_t i = n_fonts - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    Tensor<double> p(z.shape);
    for (std::size_t n = 0; n < n_fonts; ++n) {
      const bool swap = rng.uniform01() < 0.5;
      std::copy_n(z.data() + (2 * perm[n] + swap) * d, d, p.data() + 2 * n * d);
      std::copy_n(z.data() + (2 * perm[n] + !swap) * d, d, p.data() + (2 * n + 1) * d);
    }
    worst = std::max(worst, std::abs(paired_glyph_loss(p, 0.1).value - base));
  }
  out.require(worst < kLossTol, fmt("font permutation and glyph swap, max change %.1e", worst));

  const std::size_t n = 8;
  std::vector<double> gram(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    gram[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) gram[i * n + j] = gram[j * n + i] = rng.uniform(-0.08, 0.08);
  }
  bool monotone = true;
  for (auto [a, b] : {std::pair<std::size_t, std::size_t>{0, 2}, {1, 5}, {3, 6}}) {
    auto g = gram;
    double prev = paired_glyph_loss(rows_from_gram(g, n), 0.1).value;
    for (int step = 0; step < 8; ++step) {
      g[a * n + b] += 0.05;
      g[b * n + a] += 0.05;
      const double v = paired_glyph_loss(rows_from_gram(g, n), 0.1).value;
      monotone = monotone && std::isfinite(v) && v >= prev;
      prev = v;
    }
  }
  out.require(monotone, "negative-similarity monotonicity");

  const auto az = CharSet::named("A-Z");
  const auto enc = ge::train::encoder_from_checkpoint(*desk.paired);
  const auto table = ge::eval::embed_all(enc, desk.val);
  const auto base_matches = all_matches(table);
  const double base_macc = ge::eval::retrieval_macc(table, az).macc;
  // A signed permutation is exact in float; a dense rotation may only move
  // distances by rounding.
  std::vector<double> signed_perm(table.feat_dim * table.feat_dim, 0.0);
  std::vector<std::size_t> order(table.feat_dim);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = table.feat_dim - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  for (std::size_t i = 0; i < table.feat_dim; ++i) signed_perm[i * table.feat_dim + order[i]] = i % 3 ? 1.0 : -1.0;
  const auto exact = transformed(table, signed_perm);
  out.require(ge::eval::retrieval_macc(exact, az).macc == base_macc, "signed permutation keeps MACC");
  const auto rotated = transformed(table, random_orthogonal(table.feat_dim, rng));
  out.require(all_matches(rotated) == base_matches && ge::eval::retrieval_macc(rotated, az).macc == base_macc,
              fmt("dense rotation keeps every ACC (MACC %.4f)", base_macc));

  auto perturbed = *desk.paired;
  std::size_t head_tensors = 0;
  for (auto& [name, t] : perturbed.tensors) {
    if (name.rfind("head.", 0) != 0) continue;
    ++head_tensors;
    for (auto& v : t.values) v = static_cast<float>(v + rng.normal());
  }
  const auto other = ge::eval::embed_all(ge::train::encoder_from_checkpoint(perturbed), desk.val);
  const auto ia = ge::index::build_index(table, ge::eval::Aggregation::Mean);
  const auto ib = ge::index::build_index(other, ge::eval::Aggregation::Mean);
  bool same = head_tensors > 0 && other.values == table.values;
  for (std::size_t f = 0; same && f < ia.num_fonts(); ++f) {
    const auto a = ge::index::query(ia, ia.glyphs.vec(f, 0), ia.num_fonts());
    const auto b = ge::index::query(ib, ib.glyphs.vec(f, 0), ib.num_fonts());
    for (std::size_t r = 0; r < a.size(); ++r) same = same && a[r].font == b[r].font && a[r].distance == b[r].distance;
  }
  out.require(same, "perturbing " + std::to_string(head_tensors) + " projection-head tensors leaves retrieval unchanged");
  return out;
}

bool report(int id, const std::function<Outcome()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  std::string notes;
  for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
  std::printf("criterion %d: %s (%s) [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", notes.c_str(), seconds_since(t0));
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, criterion1);
  ok &= report(2, criterion2);
  ok &= report(3, criterion3);

  std::optional<Desk> loaded;
  try {
    auto all = ge::glyphset::load_dataset(ge::testing::fonts_dir(), CharSet::named("A-Z"), 64);
    auto [train, val] = ge::glyphset::split_fonts(all, {kSeed, kValFonts});
    loaded.emplace(Desk{std::move(all), std::move(train), std::move(val), std::nullopt});
  } catch (const std::exception& e) {
    std::printf("dataset: %s\n", e.what());
  }
  if (!loaded) {
    for (int id = 4; id <= 8; ++id) std::printf("criterion %d: FAIL (no dataset)\n", id);
    std::printf("SOME CRITERIA FAILED\n");
    return 1;
  }
  Desk& desk = *loaded;
  auto needs_model = [&](int id, const std::function<Outcome()>& run) {
    if (!desk.paired) {
      std::printf("criterion %d: FAIL (no trained paired-glyph model)\n", id);
      return false;
    }
    return report(id, run);
  };
  ok &= report(4, [&] { return criterion4(desk); });
  ok &= report(5, [&] { return criterion5(desk); });
  ok &= needs_model(6, [&] { return criterion6(desk); });
  ok &= needs_model(7, [&] { return criterion7(desk); });
  ok &= needs_model(8, [&] { return criterion8(desk); });
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
