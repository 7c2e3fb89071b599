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
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glyphembed/eval/embedding_table.hpp"

namespace glyphembed::eval {

// Query font k matches when its own font ranks within the top `k` of the
// gallery by L2 distance. Ties rank the lower font index first, so with k = 1
// the prediction is the lowest-index nearest gallery font.
struct PairAcc {
  char32_t query = 0;
  char32_t gallery = 0;
  std::size_t matches = 0;
  double acc = 0.0;
};

struct RetrievalReport {
  std::string query_charset;
  std::string gallery_charset;
  std::size_t n_fonts = 0;
  std::size_t k = 1;
  std::vector<PairAcc> pairs;
  double macc = 0.0;

  // {"query_charset", "gallery_charset", "n_fonts", "k", "macc", "acc": {"A->B": ..}}
  nlohmann::json to_json() const;
};

// Squared L2 distance, accumulated in double.
double squared_distance(std::span<const float> a, std::span<const float> b);

// Number of query fonts retrieved correctly for the ordered pair (ci, cj).
// Errors: SameCharacter, UnknownCharacter, InvalidArgument (k == 0).
std::size_t retrieval_matches(const EmbeddingTable& table, char32_t ci, char32_t cj, std::size_t k = 1);
double retrieval_acc(const EmbeddingTable& table, char32_t ci, char32_t cj, std::size_t k = 1);

// Mean ACC over all ordered pairs of distinct characters. Errors:
// CharsetTooSmall.
RetrievalReport retrieval_macc(const EmbeddingTable& table, const glyphset::CharSet& charset, std::size_t k = 1);

// Mean ACC over query x gallery pairs. Overlapping charsets are rejected
// (OverlappingCharsets) unless allowed, in which case same-character pairs are
// skipped and the normalizer counts only the evaluated pairs. Errors:
// EmptyCharset.
RetrievalReport cross_macc(const EmbeddingTable& table, const glyphset::CharSet& query,
                           const glyphset::CharSet& gallery, bool allow_overlap = false, std::size_t k = 1);

struct MethodRow {
  std::string name;
  double macc = 0.0;
  double delta_to_next = 0.0;  // 0 for the last row
  double delta_to_best = 0.0;
};

struct ComparisonTable {
  std::vector<MethodRow> rows;
  nlohmann::json to_json() const;
};

// Sorts by MACC descending, ties by name. Errors: IncomparableReports (fewer
// than two, or different charsets / font counts / k).
ComparisonTable compare_methods(const std::vector<std::pair<std::string, RetrievalReport>>& reports);

}  // namespace glyphembed::eval
