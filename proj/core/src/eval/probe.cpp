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

#include "glyphembed/eval/probe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "glyphembed/error.hpp"
#include "glyphembed/objectives/losses.hpp"
#include "glyphembed/train/adam.hpp"

namespace glyphembed::eval {

std::size_t AttributeTable::index_of(const std::string& font_id) const {
  const auto it = std::find(font_ids.begin(), font_ids.end(), font_id);
  if (it == font_ids.end()) throw Error(ErrorCode::MissingAttributes, "no attributes for font '" + font_id + "'");
  return static_cast<std::size_t>(it - font_ids.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

AttributeTable AttributeTable::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "attribute CSV is empty");
  const auto header = split(trim(line));
  if (header.size() < 2 || trim(header[0]) != "font_id") {
    throw Error(ErrorCode::InvalidArgument, "attribute CSV header must start with font_id");
  }
  AttributeTable t;
  t.n_attributes = header.size() - 1;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (trim(header[i]) != "attr_" + std::to_string(i)) {
      throw Error(ErrorCode::InvalidArgument, "attribute CSV column " + std::to_string(i + 1) + " must be attr_" +
                                                  std::to_string(i));
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::InvalidArgument, "attribute CSV line " + std::to_string(line_no) + " has " +
                                                  std::to_string(cells.size()) + " cells");
    }
    t.font_ids.push_back(trim(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const std::string cell = trim(cells[i]);
      double v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "attribute CSV line " + std::to_string(line_no) + ": '" + cell + "' is not a value in [0, 1]");
      }
      t.values.push_back(v);
    }
  }
  return t;
}

AttributeTable AttributeTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string AttributeTable::to_csv() const {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "font_id";
  for (std::size_t i = 1; i <= n_attributes; ++i) out << ",attr_" << i;
  out << '\n';
  for (std::size_t f = 0; f < font_ids.size(); ++f) {
    out << font_ids[f];
    for (const double v : row(f)) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

namespace {

// Max-pooled embeddings and attribute targets for the named fonts.
std::pair<nn::Tensor<double>, nn::Tensor<double>> gather(const EmbeddingTable& table, const std::vector<float>& pooled,
                                                         const AttributeTable& attrs,
                                                         std::span<const std::string> fonts) {
  const std::size_t d = table.feat_dim, a = attrs.n_attributes;
  nn::Tensor<double> x({fonts.size(), d}), y({fonts.size(), a});
  for (std::size_t i = 0; i < fonts.size(); ++i) {
    const std::size_t ti = table.font_index(fonts[i]);
    const std::size_t ai = attrs.index_of(fonts[i]);
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] = pooled[ti * d + k];
    for (std::size_t k = 0; k < a; ++k) y[i * a + k] = attrs.row(ai)[k];
  }
  return {std::move(x), std::move(y)};
}

double clamped_l1(const nn::Tensor<double>& pred, const nn::Tensor<double>& target) {
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(std::clamp(pred[i], 0.0, 1.0) - target[i]);
  return s / static_cast<double>(pred.size());
}

}  // namespace

ProbeResult linear_probe(const EmbeddingTable& table, const AttributeTable& attrs,
                         std::span<const std::string> train_fonts, std::span<const std::string> val_fonts,
                         const ProbeOptions& options) {
  if (train_fonts.empty() || val_fonts.empty()) {
    throw Error(ErrorCode::InvalidArgument, "linear probe needs training and validation fonts");
  }
  if (options.lr_grid.empty() || options.steps == 0 || options.eval_every == 0) {
    throw Error(ErrorCode::InvalidArgument, "linear probe needs a learning-rate grid and a step budget");
  }
  const auto pooled = aggregate_fonts(table, Aggregation::MaxPool);
  const auto [x_train, y_train] = gather(table, pooled, attrs, train_fonts);
  const auto [x_val, y_val] = gather(table, pooled, attrs, val_fonts);
  const std::size_t a = attrs.n_attributes;

  ProbeResult result;
  {
    std::vector<double> mean(a, 0.0);
    for (std::size_t i = 0; i < train_fonts.size(); ++i) {
      for (std::size_t k = 0; k < a; ++k) mean[k] += y_train[i * a + k];
    }
    for (auto& m : mean) m /= static_cast<double>(train_fonts.size());
    double s = 0;
    for (std::size_t i = 0; i < val_fonts.size(); ++i) {
      for (std::size_t k = 0; k < a; ++k) s += std::abs(mean[k] - y_val[i * a + k]);
    }
    result.mean_baseline_l1 = s / static_cast<double>(val_fonts.size() * a);
  }

  result.best_l1 = std::numeric_limits<double>::infinity();
  for (const double lr : options.lr_grid) {
    auto head = nn::LinearHead<double>::zeros(table.feat_dim, a);
    train::AdamState<double> adam(head.params());
    double best = clamped_l1(head.forward(x_val), y_val);
    std::size_t best_step = 0;
    for (std::size_t step = 1; step <= options.steps; ++step) {
      head.params().zero_grad();
      nn::LinearHead<double>::Tape tape;
      const auto pred = head.forward(x_train, &tape);
      nn::Tensor<double> dpred;
      objectives::attribute_l1(pred, y_train, &dpred);
      head.backward(tape, dpred);
      train::adam_step(head.params(), adam, lr);
      if (step % options.eval_every == 0) {
        const double l1 = clamped_l1(head.forward(x_val), y_val);
        if (l1 < best) {
          best = l1;
          best_step = step;
        }
      }
    }
    result.best_l1_per_lr.push_back(best);
    if (best < result.best_l1) {
      result.best_l1 = best;
      result.best_lr = lr;
      result.best_step = best_step;
    }
  }
  return result;
}

}  // namespace glyphembed::eval
