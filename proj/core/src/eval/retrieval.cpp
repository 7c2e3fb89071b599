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

#include "glyphembed/eval/retrieval.hpp"

#include <algorithm>

#include "glyphembed/error.hpp"

namespace glyphembed::eval {

using glyphset::CharSet;
using glyphset::codepoint_label;

nlohmann::json RetrievalReport::to_json() const {
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& p : pairs) acc[codepoint_label(p.query) + "->" + codepoint_label(p.gallery)] = p.acc;
  return {{"query_charset", query_charset},
          {"gallery_charset", gallery_charset},
          {"n_fonts", n_fonts},
          {"k", k},
          {"macc", macc},
          {"acc", acc}};
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

namespace {

std::size_t char_index(const EmbeddingTable& table, char32_t cp) {
  const auto i = table.charset.index_of(cp);
  if (!i) throw Error(ErrorCode::UnknownCharacter, codepoint_label(cp) + " is not in the embedding table");
  return *i;
}

std::size_t matches_by_index(const EmbeddingTable& table, std::size_t qi, std::size_t gi, std::size_t k) {
  const std::size_t n = table.num_fonts();
  std::vector<double> dist(n);
  std::size_t matches = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto probe = table.vec(q, qi);
    for (std::size_t g = 0; g < n; ++g) dist[g] = squared_distance(probe, table.vec(g, gi));
    // Rank of the true font: gallery fonts strictly closer, plus equally
    // close fonts with a lower index.
    std::size_t rank = 0;
    for (std::size_t g = 0; g < n; ++g) {
      if (dist[g] < dist[q] || (dist[g] == dist[q] && g < q)) ++rank;
    }
    if (rank < k) ++matches;
  }
  return matches;
}

void finish(RetrievalReport& r) {
  double sum = 0;
  for (const auto& p : r.pairs) sum += p.acc;
  r.macc = r.pairs.empty() ? 0.0 : sum / static_cast<double>(r.pairs.size());
}

}  // namespace

std::size_t retrieval_matches(const EmbeddingTable& table, char32_t ci, char32_t cj, std::size_t k) {
  if (ci == cj) throw Error(ErrorCode::SameCharacter, "query and gallery character are both " + codepoint_label(ci));
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (table.num_fonts() == 0) throw Error(ErrorCode::EmptyDataset, "embedding table has no fonts");
  return matches_by_index(table, char_index(table, ci), char_index(table, cj), k);
}

double retrieval_acc(const EmbeddingTable& table, char32_t ci, char32_t cj, std::size_t k) {
  return static_cast<double>(retrieval_matches(table, ci, cj, k)) / static_cast<double>(table.num_fonts());
}

RetrievalReport retrieval_macc(const EmbeddingTable& table, const CharSet& charset, std::size_t k) {
  if (charset.size() < 2) throw Error(ErrorCode::CharsetTooSmall, "MACC needs at least two characters");
  RetrievalReport r;
  r.query_charset = r.gallery_charset = charset.id();
  r.n_fonts = table.num_fonts();
  r.k = k;
  for (const auto ci : charset.codepoints()) {
    for (const auto cj : charset.codepoints()) {
      if (ci == cj) continue;
      const auto m = retrieval_matches(table, ci, cj, k);
      r.pairs.push_back({ci, cj, m, static_cast<double>(m) / static_cast<double>(r.n_fonts)});
    }
  }
  finish(r);
  return r;
}

RetrievalReport cross_macc(const EmbeddingTable& table, const CharSet& query, const CharSet& gallery,
                           bool allow_overlap, std::size_t k) {
  if (query.size() == 0 || gallery.size() == 0) throw Error(ErrorCode::EmptyCharset, "empty query or gallery set");
  if (!allow_overlap) {
    for (const auto cp : query.codepoints()) {
      if (gallery.contains(cp)) {
        throw Error(ErrorCode::OverlappingCharsets, codepoint_label(cp) + " is in both query and gallery sets");
      }
    }
  }
  RetrievalReport r;
  r.query_charset = query.id();
  r.gallery_charset = gallery.id();
  r.n_fonts = table.num_fonts();
  r.k = k;
  for (const auto ci : query.codepoints()) {
    for (const auto cj : gallery.codepoints()) {
      if (ci == cj) continue;
      const auto m = retrieval_matches(table, ci, cj, k);
      r.pairs.push_back({ci, cj, m, static_cast<double>(m) / static_cast<double>(r.n_fonts)});
    }
  }
  if (r.pairs.empty()) throw Error(ErrorCode::EmptyCharset, "no distinct query/gallery pairs");
  finish(r);
  return r;
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    out.push_back({{"name", row.name},
                   {"macc", row.macc},
                   {"delta_to_next", row.delta_to_next},
                   {"delta_to_best", row.delta_to_best}});
  }
  return {{"rows", out}};
}

ComparisonTable compare_methods(const std::vector<std::pair<std::string, RetrievalReport>>& reports) {
  if (reports.size() < 2) throw Error(ErrorCode::IncomparableReports, "need at least two reports to compare");
  const auto& ref = reports.front().second;
  for (const auto& [name, r] : reports) {
    if (r.query_charset != ref.query_charset || r.gallery_charset != ref.gallery_charset ||
        r.n_fonts != ref.n_fonts || r.k != ref.k) {
      throw Error(ErrorCode::IncomparableReports, "report '" + name + "' was computed over a different setup");
    }
  }
  ComparisonTable t;
  for (const auto& [name, r] : reports) t.rows.push_back({name, r.macc, 0.0, 0.0});
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const MethodRow& a, const MethodRow& b) {
    if (a.macc != b.macc) return a.macc > b.macc;
    return a.name < b.name;
  });
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    t.rows[i].delta_to_best = t.rows.front().macc - t.rows[i].macc;
    t.rows[i].delta_to_next = i + 1 < t.rows.size() ? t.rows[i].macc - t.rows[i + 1].macc : 0.0;
  }
  return t;
}

}  // namespace glyphembed::eval
