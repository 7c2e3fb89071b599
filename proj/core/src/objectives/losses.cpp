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

#include "glyphembed/objectives/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphembed/error.hpp"

namespace glyphembed::objectives {

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::ShapeMismatch, "cosine_sim: vectors differ in length");
  double uu = 0, vv = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
  }
  if (uu == 0 || vv == 0) throw Error(ErrorCode::ZeroVector, "cosine_sim of a zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

namespace {

std::size_t row_width(const Tensor<double>& z) { return static_cast<std::size_t>(z.cols()); }

template <typename T>
Tensor<double> to_double(const Tensor<T>& t) {
  if constexpr (std::is_same_v<T, double>) {
    return t;
  } else {
    return t.template cast<double>();
  }
}

template <typename T>
void from_double(const Tensor<double>& src, Tensor<T>* dst) {
  if (!dst) return;
  if constexpr (std::is_same_v<T, double>) {
    *dst = src;
  } else {
    *dst = src.template cast<T>();
  }
}

std::vector<double> row_norms(const Tensor<double>& z) {
  const std::size_t rows = static_cast<std::size_t>(z.rows()), d = row_width(z);
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < d; ++c) s += z[r * d + c] * z[r * d + c];
    if (s == 0) throw Error(ErrorCode::ZeroVector, "row " + std::to_string(r) + " is all zero");
    norms[r] = std::sqrt(s);
  }
  return norms;
}

void require_same(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(what) + ": shapes " + nn::shape_string(a) + " and " + nn::shape_string(b) + " differ");
  }
}

}  // namespace

template <typename T>
Tensor<T> l2_normalize_rows(const Tensor<T>& z) {
  const auto zd = to_double(z);
  const auto norms = row_norms(zd);
  const std::size_t d = row_width(zd);
  Tensor<T> out = z;
  for (std::size_t r = 0; r < norms.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] = static_cast<T>(zd[r * d + c] / norms[r]);
  }
  return out;
}

template <typename T>
Tensor<T> l2_normalize_rows_backward(const Tensor<T>& z, const Tensor<T>& dzhat) {
  require_same(z.shape, dzhat.shape, "l2_normalize_rows_backward");
  const auto zd = to_double(z);
  const auto norms = row_norms(zd);
  const std::size_t d = row_width(zd);
  Tensor<T> out = dzhat;
  for (std::size_t r = 0; r < norms.size(); ++r) {
    double dot = 0;
    for (std::size_t c = 0; c < d; ++c) dot += zd[r * d + c] / norms[r] * static_cast<double>(dzhat[r * d + c]);
    for (std::size_t c = 0; c < d; ++c) {
      const double u = zd[r * d + c] / norms[r];
      out[r * d + c] = static_cast<T>((static_cast<double>(dzhat[r * d + c]) - u * dot) / norms[r]);
    }
  }
  return out;
}

Denominator denominator_from_string(std::string_view s) {
  if (s == "per_font") return Denominator::PerFont;
  if (s == "per_anchor") return Denominator::PerAnchor;
  throw Error(ErrorCode::ConfigInvalid, "denominator must be 'per_font' or 'per_anchor', got '" + std::string(s) + "'");
}

std::string_view to_string(Denominator d) { return d == Denominator::PerFont ? "per_font" : "per_anchor"; }

template <typename T>
LossValue paired_glyph_loss(const Tensor<T>& z, double tau, Denominator mode, Tensor<T>* dz) {
  if (z.rank() != 2 || z.dim(0) % 2 != 0 || z.dim(0) < 4) {
    throw Error(ErrorCode::BadBatch, "paired-glyph loss needs 2N rows with N >= 2, got " + nn::shape_string(z.shape));
  }
  if (!(tau > 0)) throw Error(ErrorCode::BadBatch, "temperature must be positive");
  const auto zd = to_double(z);
  const std::size_t m = zd.dim(0), d = zd.dim(1), n_fonts = m / 2;
  const auto norms = row_norms(zd);
  Eigen::MatrixXd u(m, d);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < d; ++c) u(r, c) = zd[r * d + c] / norms[r];
  }
  const Eigen::MatrixXd s = (u * u.transpose()) / tau;
  const double scale = mode == Denominator::PerFont ? 1.0 / n_fonts : 1.0 / m;

  LossValue loss;
  loss.terms.resize(m);
  Eigen::MatrixXd ds = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t partner = i ^ 1;
    auto in_denominator = [&](std::size_t k) { return k == partner || k / 2 != i / 2; };
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      if (in_denominator(k)) mx = std::max(mx, s(i, k));
    }
    double sum = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (in_denominator(k)) sum += std::exp(s(i, k) - mx);
    }
    const double lse = mx + std::log(sum);
    loss.terms[i] = lse - s(i, partner);
    loss.value += loss.terms[i];
    if (dz) {
      for (std::size_t k = 0; k < m; ++k) {
        if (in_denominator(k)) ds(i, k) = scale * std::exp(s(i, k) - lse);
      }
      ds(i, partner) -= scale;
    }
  }
  loss.value *= scale;
  if (!std::isfinite(loss.value)) throw Error(ErrorCode::NonFiniteLoss, "paired-glyph loss is not finite");

  if (dz) {
    const Eigen::MatrixXd du = ((ds + ds.transpose()) * u) / tau;
    Tensor<double> grad({m, d});
    for (std::size_t r = 0; r < m; ++r) {
      const double dot = u.row(r).dot(du.row(r));
      for (std::size_t c = 0; c < d; ++c) grad[r * d + c] = (du(r, c) - u(r, c) * dot) / norms[r];
    }
    from_double(grad, dz);
  }
  return loss;
}

template <typename T>
LossValue triplet_loss(const Tensor<T>& anchor, const Tensor<T>& positive, const Tensor<T>& negative, double margin,
                       Tensor<T>* danchor, Tensor<T>* dpositive, Tensor<T>* dnegative) {
  require_same(anchor.shape, positive.shape, "triplet_loss");
  require_same(anchor.shape, negative.shape, "triplet_loss");
  if (anchor.rank() != 2 || anchor.dim(0) == 0) throw Error(ErrorCode::ShapeMismatch, "triplet_loss needs R x d rows");
  const auto a = to_double(anchor), p = to_double(positive), n = to_double(negative);
  const std::size_t rows = a.dim(0), d = a.dim(1);
  Tensor<double> ga({rows, d}), gp({rows, d}), gn({rows, d});
  LossValue loss;
  loss.terms.resize(rows);
  const double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double dap = 0, dan = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t i = r * d + c;
      dap += (a[i] - p[i]) * (a[i] - p[i]);
      dan += (a[i] - n[i]) * (a[i] - n[i]);
    }
    dap = std::sqrt(dap);
    dan = std::sqrt(dan);
    const double hinge = dap - dan + margin;
    loss.terms[r] = std::max(0.0, hinge);
    loss.value += loss.terms[r];
    if (hinge <= 0) continue;
    for (std::size_t c = 0; c < d; ++c) {
      const std::size_t i = r * d + c;
      const double gpos = dap > 0 ? (a[i] - p[i]) / dap * inv : 0.0;
      const double gneg = dan > 0 ? (a[i] - n[i]) / dan * inv : 0.0;
      ga[i] = gpos - gneg;
      gp[i] = -gpos;
      gn[i] = gneg;
    }
  }
  loss.value *= inv;
  from_double(ga, danchor);
  from_double(gp, dpositive);
  from_double(gn, dnegative);
  return loss;
}

template <typename T>
LossValue batch_triplet_loss(const Tensor<T>& z, double margin, Tensor<T>* dz) {
  if (z.rank() != 2 || z.dim(0) % 2 != 0 || z.dim(0) < 4) {
    throw Error(ErrorCode::BadBatch, "triplet batch needs 2N rows with N >= 2, got " + nn::shape_string(z.shape));
  }
  const std::size_t m = z.dim(0), d = z.dim(1);
  const Tensor<T> u = l2_normalize_rows(z);
  std::vector<std::size_t> ai, pi, ni;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k / 2 == i / 2) continue;
      ai.push_back(i);
      pi.push_back(i ^ 1);
      ni.push_back(k);
    }
  }
  auto gather = [&](const std::vector<std::size_t>& idx) {
    Tensor<T> out({idx.size(), d});
    for (std::size_t r = 0; r < idx.size(); ++r) std::copy_n(u.data() + idx[r] * d, d, out.data() + r * d);
    return out;
  };
  Tensor<T> ga, gp, gn;
  auto loss = triplet_loss(gather(ai), gather(pi), gather(ni), margin, dz ? &ga : nullptr, dz ? &gp : nullptr,
                           dz ? &gn : nullptr);
  if (dz) {
    Tensor<T> du({m, d});
    for (std::size_t r = 0; r < ai.size(); ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        du[ai[r] * d + c] += ga[r * d + c];
        du[pi[r] * d + c] += gp[r * d + c];
        du[ni[r] * d + c] += gn[r * d + c];
      }
    }
    *dz = l2_normalize_rows_backward(z, du);
  }
  return loss;
}

template <typename T>
LossValue classification_loss(const Tensor<T>& logits, std::span<const std::size_t> labels, Tensor<T>* dlogits) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "classification_loss: logits " + nn::shape_string(logits.shape) + " vs " +
                                              std::to_string(labels.size()) + " labels");
  }
  const std::size_t rows = logits.dim(0), k = logits.dim(1);
  Tensor<double> grad({rows, k});
  LossValue loss;
  loss.terms.resize(rows);
  const double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] >= k) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "label " + std::to_string(labels[r]) + " with " + std::to_string(k) + " classes");
    }
    const T* row = logits.data() + r * k;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, static_cast<double>(row[c]));
    double sum = 0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(static_cast<double>(row[c]) - mx);
    const double lse = mx + std::log(sum);
    loss.terms[r] = lse - static_cast<double>(row[labels[r]]);
    loss.value += loss.terms[r];
    for (std::size_t c = 0; c < k; ++c) grad[r * k + c] = std::exp(static_cast<double>(row[c]) - lse) * inv;
    grad[r * k + labels[r]] -= inv;
  }
  loss.value *= inv;
  if (!std::isfinite(loss.value)) throw Error(ErrorCode::NonFiniteLoss, "classification loss is not finite");
  from_double(grad, dlogits);
  return loss;
}

template <typename T>
LossValue reconstruction_loss(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* dpred) {
  require_same(pred.shape, target.shape, "L1 loss");
  if (pred.size() == 0) throw Error(ErrorCode::ShapeMismatch, "L1 loss of empty tensors");
  const double inv = 1.0 / static_cast<double>(pred.size());
  LossValue loss;
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += std::abs(static_cast<double>(pred[i]) - static_cast<double>(target[i]));
  }
  loss.value = sum * inv;
  if (dpred) {
    dpred->shape = pred.shape;
    dpred->values.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double diff = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
      (*dpred)[i] = static_cast<T>(diff > 0 ? inv : (diff < 0 ? -inv : 0.0));
    }
  }
  return loss;
}

#define GLYPHEMBED_INSTANTIATE_LOSSES(T)                                                                         \
  template Tensor<T> l2_normalize_rows(const Tensor<T>&);                                                       \
  template Tensor<T> l2_normalize_rows_backward(const Tensor<T>&, const Tensor<T>&);                            \
  template LossValue paired_glyph_loss(const Tensor<T>&, double, Denominator, Tensor<T>*);                      \
  template LossValue triplet_loss(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double, Tensor<T>*,     \
                                  Tensor<T>*, Tensor<T>*);                                                      \
  template LossValue batch_triplet_loss(const Tensor<T>&, double, Tensor<T>*);                                  \
  template LossValue classification_loss(const Tensor<T>&, std::span<const std::size_t>, Tensor<T>*);          \
  template LossValue reconstruction_loss(const Tensor<T>&, const Tensor<T>&, Tensor<T>*);

GLYPHEMBED_INSTANTIATE_LOSSES(float)
GLYPHEMBED_INSTANTIATE_LOSSES(double)

}  // namespace glyphembed::objectives
