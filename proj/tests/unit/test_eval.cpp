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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphembed/error.hpp"
#include "glyphembed/eval/embedding_table.hpp"
#include "glyphembed/eval/probe.hpp"
#include "glyphembed/eval/retrieval.hpp"
#include "test_support.hpp"

namespace glyphembed::eval {
namespace {

using glyphset::CharSet;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::InvalidArgument;
}

// Exhaustive nearest-neighbor count with the lowest-index tie rule.
std::size_t oracle_matches(const EmbeddingTable& t, std::size_t ci, std::size_t cj, std::size_t k) {
  const std::size_t n = t.num_fonts();
  std::size_t matches = 0;
  for (std::size_t q = 0; q < n; ++q) {
    std::vector<double> d(n);
    for (std::size_t g = 0; g < n; ++g) {
      double s = 0;
      for (std::size_t x = 0; x < t.feat_dim; ++x) {
        const double diff = static_cast<double>(t.vec(q, ci)[x]) - static_cast<double>(t.vec(g, cj)[x]);
        s += diff * diff;
      }
      d[g] = s;
    }
    std::size_t ahead = 0;
    for (std::size_t g = 0; g < n; ++g) ahead += d[g] < d[q] || (d[g] == d[q] && g < q);
    matches += ahead < k;
  }
  return matches;
}

double oracle_macc(const EmbeddingTable& t, const CharSet& query, const CharSet& gallery, std::size_t k = 1) {
  double sum = 0;
  std::size_t pairs = 0;
  for (char32_t a : query.codepoints()) {
    for (char32_t b : gallery.codepoints()) {
      if (a == b) continue;
      sum += static_cast<double>(oracle_matches(t, *t.charset.index_of(a), *t.charset.index_of(b), k)) /
             static_cast<double>(t.num_fonts());
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

EmbeddingTable table_2d(std::vector<std::vector<float>> a, std::vector<std::vector<float>> b) {
  EmbeddingTable t;
  t.charset = CharSet("AB", {U'A', U'B'});
  t.feat_dim = 2;
  for (std::size_t f = 0; f < a.size(); ++f) {
    t.font_ids.push_back("f" + std::to_string(f));
    t.values.insert(t.values.end(), a[f].begin(), a[f].end());
    t.values.insert(t.values.end(), b[f].begin(), b[f].end());
  }
  return t;
}

TEST(Retrieval, OneHotIsPerfect) {
  const auto cs = CharSet::named("A-J");
  const auto t = testing::one_hot_table(12, cs);
  EXPECT_EQ(retrieval_acc(t, U'A', U'B'), 1.0);
  const auto r = retrieval_macc(t, cs);
  EXPECT_EQ(r.macc, 1.0);
  EXPECT_EQ(r.pairs.size(), 90u);
}

TEST(Retrieval, IdenticalEmbeddingsMatchOnlyFontZero) {
  auto t = testing::one_hot_table(7, CharSet::named("A-C"));
  std::fill(t.values.begin(), t.values.end(), 0.25f);
  EXPECT_EQ(retrieval_matches(t, U'A', U'C'), 1u);
  EXPECT_DOUBLE_EQ(retrieval_acc(t, U'A', U'C'), 1.0 / 7.0);
  EXPECT_EQ(retrieval_matches(t, U'A', U'C', 3), 3u);
}

TEST(Retrieval, HandSetConfusion) {
  // Query font 2 sits closest to gallery font 1.
  const auto t = table_2d({{0, 0}, {5, 0}, {4, 1}}, {{0, 0.1f}, {4.2f, 0.8f}, {9, 9}});
  EXPECT_EQ(retrieval_matches(t, U'A', U'B'), 2u);
  EXPECT_DOUBLE_EQ(retrieval_acc(t, U'A', U'B'), 2.0 / 3.0);
  EXPECT_EQ(retrieval_matches(t, U'A', U'B'), oracle_matches(t, 0, 1, 1));
  // Row-wise and column-wise argmins differ.
  EXPECT_EQ(retrieval_matches(t, U'B', U'A'), oracle_matches(t, 1, 0, 1));
}

TEST(Retrieval, MaccMatchesOracleOnRandomTables) {
  Rng rng(21);
  const auto cs = CharSet::named("A-E");
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = testing::random_table(20, cs, 6, rng);
    const auto r = retrieval_macc(t, cs);
    ASSERT_EQ(r.pairs.size(), 20u);
    double sum = 0;
    for (const auto& p : r.pairs) {
      EXPECT_EQ(p.matches, oracle_matches(t, *cs.index_of(p.query), *cs.index_of(p.gallery), 1));
      EXPECT_GE(p.acc, 0.0);
      EXPECT_LE(p.acc, 1.0);
      sum += p.acc;
    }
    EXPECT_EQ(r.macc, sum / 20.0);
    EXPECT_DOUBLE_EQ(r.macc, oracle_macc(t, cs, cs));
    for (std::size_t k : {2u, 5u}) EXPECT_DOUBLE_EQ(retrieval_macc(t, cs, k).macc, oracle_macc(t, cs, cs, k));
  }
}

TEST(Retrieval, TwoCharactersGiveTwoPairs) {
  Rng rng(22);
  const auto cs = CharSet("xy", {U'x', U'y'});
  const auto t = testing::random_table(9, cs, 3, rng);
  const auto r = retrieval_macc(t, cs);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].query, U'x');
  EXPECT_EQ(r.pairs[1].query, U'y');
  EXPECT_DOUBLE_EQ(r.macc, (r.pairs[0].acc + r.pairs[1].acc) / 2);
}

TEST(Retrieval, OrthogonalInvariance) {
  Rng rng(23);
  const std::size_t dim = 4;
  const auto cs = CharSet::named("0-5");
  const auto t = testing::random_table(15, cs, dim, rng);
  // Random orthogonal matrix via Gram-Schmidt.
  std::vector<double> q(dim * dim);
  for (auto& v : q) v = rng.normal();
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0;
      for (std::size_t k = 0; k < dim; ++k) d += q[i * dim + k] * q[j * dim + k];
      for (std::size_t k = 0; k < dim; ++k) q[i * dim + k] -= d * q[j * dim + k];
    }
    double n = 0;
    for (std::size_t k = 0; k < dim; ++k) n += q[i * dim + k] * q[i * dim + k];
    for (std::size_t k = 0; k < dim; ++k) q[i * dim + k] /= std::sqrt(n);
  }
  auto rotated = t;
  for (std::size_t v = 0; v < t.values.size() / dim; ++v) {
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += q[i * dim + k] * t.values[v * dim + k];
      rotated.values[v * dim + i] = static_cast<float>(s);
    }
  }
  const auto a = retrieval_macc(t, cs), b = retrieval_macc(rotated, cs);
  for (std::size_t p = 0; p < a.pairs.size(); ++p) EXPECT_EQ(a.pairs[p].matches, b.pairs[p].matches);
}

TEST(Retrieval, ReindexingMovesTieWinner) {
  // Fonts 0 and 1 share a vector; whichever comes first wins the tie.
  auto t = table_2d({{1, 1}, {1, 1}, {7, 7}}, {{1, 1}, {1, 1}, {7, 7}});
  EXPECT_EQ(retrieval_matches(t, U'A', U'B'), 2u);
  EXPECT_EQ(oracle_matches(t, 0, 1, 1), 2u);
  auto swapped = table_2d({{7, 7}, {1, 1}, {1, 1}}, {{7, 7}, {1, 1}, {1, 1}});
  EXPECT_EQ(retrieval_matches(swapped, U'A', U'B'), 2u);
  // Font "f1" of the swapped table (old font 0) now wins; the other tied font loses.
  EXPECT_EQ(retrieval_matches(swapped, U'A', U'B', 2), 3u);
}

TEST(Retrieval, Errors) {
  const auto cs = CharSet::named("A-C");
  const auto t = testing::one_hot_table(3, cs);
  EXPECT_EQ(code_of([&] { retrieval_acc(t, U'A', U'A'); }), ErrorCode::SameCharacter);
  EXPECT_EQ(code_of([&] { retrieval_acc(t, U'A', U'Z'); }), ErrorCode::UnknownCharacter);
  EXPECT_EQ(code_of([&] { retrieval_acc(t, U'A', U'B', 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { retrieval_macc(t, CharSet("A", {U'A'})); }), ErrorCode::CharsetTooSmall);
}

TEST(CrossMacc, DigitsToLetters) {
  Rng rng(24);
  const auto all = CharSet::named("0-Z");
  const auto digits = CharSet::named("0-9"), letters = CharSet::named("a-Z");
  const auto t = testing::random_table(8, all, 3, rng);
  const auto r = cross_macc(t, digits, letters);
  EXPECT_EQ(r.pairs.size(), 520u);
  EXPECT_EQ(r.query_charset, "0-9");
  EXPECT_EQ(r.gallery_charset, "a-Z");
  EXPECT_DOUBLE_EQ(r.macc, oracle_macc(t, digits, letters));
  EXPECT_EQ(cross_macc(testing::one_hot_table(8, all), digits, letters).macc, 1.0);
}

TEST(CrossMacc, SameSetReproducesMacc) {
  Rng rng(25);
  const auto cs = CharSet::named("A-F");
  const auto t = testing::random_table(11, cs, 4, rng);
  const auto a = cross_macc(t, cs, cs, true);
  const auto b = retrieval_macc(t, cs);
  EXPECT_EQ(a.pairs.size(), b.pairs.size());
  EXPECT_DOUBLE_EQ(a.macc, b.macc);
}

TEST(CrossMacc, Errors) {
  const auto cs = CharSet::named("A-F");
  const auto t = testing::one_hot_table(3, cs);
  EXPECT_EQ(code_of([&] { cross_macc(t, CharSet::named("A-C"), CharSet::named("C-F")); }),
            ErrorCode::OverlappingCharsets);
  EXPECT_EQ(code_of([&] { cross_macc(t, CharSet("A", {U'A'}), CharSet("A", {U'A'}), true); }),
            ErrorCode::EmptyCharset);
}

TEST(RetrievalReport, Json) {
  const auto cs = CharSet("AB", {U'A', U'B'});
  const auto r = retrieval_macc(testing::one_hot_table(4, cs), cs);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("macc"), 1.0);
  EXPECT_EQ(j.at("n_fonts"), 4);
  EXPECT_EQ(j.at("acc").at("A->B"), 1.0);
  EXPECT_EQ(j.at("acc").size(), 2u);
}

RetrievalReport report(double macc, std::string charset = "0-9") {
  RetrievalReport r;
  r.query_charset = r.gallery_charset = std::move(charset);
  r.n_fonts = 10;
  r.macc = macc;
  return r;
}

TEST(CompareMethods, OrderingAndDeltas) {
  const auto two = compare_methods({{"B", report(0.5)}, {"A", report(0.9)}});
  ASSERT_EQ(two.rows.size(), 2u);
  EXPECT_EQ(two.rows[0].name, "A");
  EXPECT_NEAR(two.rows[0].delta_to_next, 0.4, 1e-15);
  EXPECT_EQ(two.rows[1].delta_to_next, 0.0);
  EXPECT_NEAR(two.rows[1].delta_to_best, 0.4, 1e-15);
  EXPECT_EQ(two.rows[0].delta_to_best, 0.0);

  const auto tie = compare_methods({{"zeta", report(0.7)}, {"alpha", report(0.7)}});
  EXPECT_EQ(tie.rows[0].name, "alpha");

  const auto three = compare_methods({{"x", report(0.2)}, {"y", report(0.8)}, {"z", report(0.5)}});
  for (std::size_t i = 0; i + 1 < 3; ++i) {
    EXPECT_GT(three.rows[i].macc, three.rows[i + 1].macc);
    EXPECT_DOUBLE_EQ(three.rows[i].delta_to_next, three.rows[i].macc - three.rows[i + 1].macc);
  }
  EXPECT_EQ(three.to_json().at("rows").size(), 3u);
  EXPECT_EQ(three.to_json().at("rows")[0].at("name"), "y");
}

TEST(CompareMethods, Errors) {
  EXPECT_EQ(code_of([] { compare_methods({{"a", report(0.1)}}); }), ErrorCode::IncomparableReports);
  EXPECT_EQ(code_of([] { compare_methods({{"a", report(0.1)}, {"b", report(0.2, "A-Z")}}); }),
            ErrorCode::IncomparableReports);
}

TEST(EmbeddingTable, EmbedAllCountsAndBatching) {
  const auto ds = testing::bundled_subset("A-Z", 32, 10);
  nn::EncoderConfig cfg;
  cfg.input_size = 32;
  cfg.channels = {4, 8};
  cfg.feat_dim = 12;
  Rng rng(26);
  const nn::Encoder<float> enc(cfg, rng);
  const auto t = embed_all(enc, ds, 7, "test@0/0");
  EXPECT_EQ(t.num_fonts(), 10u);
  EXPECT_EQ(t.values.size(), 260u * 12u);
  EXPECT_EQ(t.source, "test@0/0");
  EXPECT_EQ(embed_all(enc, ds, 7).values, t.values);
  const auto big = embed_all(enc, ds, 64);
  for (std::size_t i = 0; i < t.values.size(); ++i) EXPECT_NEAR(big.values[i], t.values[i], 1e-6);
  for (std::size_t f : {0u, 9u}) {
    for (std::size_t c : {0u, 13u, 25u}) {
      const glyphset::GlyphImage img = ds.image(f, c);
      const auto one = nn::encode(enc, std::span<const glyphset::GlyphImage>(&img, 1));
      for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(t.vec(f, c)[k], one[k], 1e-6);
    }
  }
  cfg.input_size = 64;
  const nn::Encoder<float> wrong(cfg, rng);
  EXPECT_EQ(code_of([&] { embed_all(wrong, ds); }), ErrorCode::ShapeMismatch);
}

TEST(EmbeddingTable, JsonRoundTripAndValidation) {
  Rng rng(27);
  auto t = testing::random_table(3, CharSet::named("0-2"), 4, rng);
  t.charset = CharSet("mixed", {U'0', U' ', U'b'});
  t.source = "paired_glyph@10/1";
  const auto back = EmbeddingTable::from_json(t.to_json());
  EXPECT_EQ(back.font_ids, t.font_ids);
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(back.source, t.source);
  EXPECT_TRUE(t.to_json().at("fonts")[0].at("glyphs").contains("U+0020"));
  EXPECT_EQ(t.font_index("font101"), 1u);
  EXPECT_EQ(code_of([&] { t.font_index("nope"); }), ErrorCode::UnknownFont);
  t.values[5] = std::nanf("");
  EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::InvalidArgument);
  t.values.pop_back();
  EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::ShapeMismatch);
}

TEST(EmbeddingTable, Aggregation) {
  const auto cs = CharSet("AB", {U'A', U'B'});
  const auto t = table_2d({{1, -2}, {0, 0}}, {{3, -4}, {2, 2}});
  EXPECT_EQ(aggregate_fonts(t, Aggregation::Mean), (std::vector<float>{2, -3, 1, 1}));
  EXPECT_EQ(aggregate_fonts(t, Aggregation::MaxPool), (std::vector<float>{3, -2, 2, 2}));
  EXPECT_EQ(aggregation_from_string("maxpool"), Aggregation::MaxPool);
  EXPECT_EQ(to_string(Aggregation::Mean), "mean");
  EXPECT_EQ(code_of([] { aggregation_from_string("sum"); }), ErrorCode::InvalidArgument);
}

AttributeTable attributes(const std::vector<std::string>& fonts, Rng* rng, double constant) {
  AttributeTable a;
  a.font_ids = fonts;
  for (std::size_t i = 0; i < fonts.size() * a.n_attributes; ++i) {
    a.values.push_back(rng ? (rng->uniform01() < 0.5 ? 0.0 : 1.0) : constant);
  }
  return a;
}

TEST(AttributeTable, CsvRoundTripAndErrors) {
  Rng rng(28);
  const auto a = attributes({"x", "y"}, &rng, 0);
  const auto back = AttributeTable::parse_csv(a.to_csv());
  EXPECT_EQ(back.font_ids, a.font_ids);
  EXPECT_EQ(back.values, a.values);
  EXPECT_EQ(back.index_of("y"), 1u);
  EXPECT_EQ(code_of([&] { back.index_of("z"); }), ErrorCode::MissingAttributes);
  EXPECT_EQ(code_of([] { AttributeTable::parse_csv(""); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { AttributeTable::parse_csv("name,attr_1\nx,0.5\n"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { AttributeTable::parse_csv("font_id,attr_1\nx,1.5\n"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { AttributeTable::parse_csv("font_id,attr_1,attr_2\nx,0.5\n"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(AttributeTable::parse_csv("font_id,attr_1\nx,0.5\n").n_attributes, 1u);
  EXPECT_EQ(code_of([] { AttributeTable::read_csv("/nonexistent.csv"); }), ErrorCode::InvalidArgument);
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(const EmbeddingTable& t, std::size_t n_train) {
  return {{t.font_ids.begin(), t.font_ids.begin() + static_cast<std::ptrdiff_t>(n_train)},
          {t.font_ids.begin() + static_cast<std::ptrdiff_t>(n_train), t.font_ids.end()}};
}

TEST(LinearProbe, ConstantTargetIsLearnedByBias) {
  Rng rng(29);
  const auto t = testing::random_table(30, CharSet::named("A-E"), 8, rng);
  const auto attrs = attributes(t.font_ids, nullptr, 0.37);
  const auto [train_ids, val_ids] = split_ids(t, 20);
  const auto r = linear_probe(t, attrs, train_ids, val_ids);
  EXPECT_LT(r.best_l1, 1e-3);
  EXPECT_EQ(r.best_l1_per_lr.size(), 5u);
  EXPECT_NEAR(r.mean_baseline_l1, 0.0, 1e-12);
}

TEST(LinearProbe, RandomTargetsNoBetterThanMean) {
  // 120 training fonts, 28 validation fonts.
  Rng rng(30);
  const auto t = testing::random_table(148, CharSet::named("A-E"), 16, rng);
  const auto attrs = attributes(t.font_ids, &rng, 0);
  const auto [train_ids, val_ids] = split_ids(t, 120);
  const auto r = linear_probe(t, attrs, train_ids, val_ids);
  EXPECT_GE(r.best_l1, 0.25);
  EXPECT_LE(r.best_l1, 0.5);
  EXPECT_GT(r.best_l1, r.mean_baseline_l1 - 0.02);
}

TEST(LinearProbe, Errors) {
  Rng rng(31);
  const auto t = testing::random_table(6, CharSet::named("A-B"), 3, rng);
  auto attrs = attributes(t.font_ids, &rng, 0);
  const auto [train_ids, val_ids] = split_ids(t, 4);
  attrs.font_ids[5] = "other";
  EXPECT_EQ(code_of([&] { linear_probe(t, attrs, train_ids, val_ids); }), ErrorCode::MissingAttributes);
  const std::vector<std::string> none;
  EXPECT_EQ(code_of([&] { linear_probe(t, attrs, train_ids, none); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace glyphembed::eval
