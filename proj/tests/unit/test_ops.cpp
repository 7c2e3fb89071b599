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

#include <cmath>

#include "glyphembed/error.hpp"
#include "glyphembed/nn/ops.hpp"
#include "glyphembed/nn/param_store.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::nn {
namespace {

Tensor<double> randn(std::vector<std::size_t> shape, Rng& rng) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values) v = rng.normal();
  return t;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Direct nested-loop convolution on the channel-major layout.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& bias,
                          const ConvGeometry& g) {
  const std::size_t out_c = w.dim(0), ho = g.out_height(), wo = g.out_width(), k = g.kernel;
  Tensor<double> y({out_c, g.batch * ho * wo});
  for (std::size_t o = 0; o < out_c; ++o) {
    for (std::size_t b = 0; b < g.batch; ++b) {
      for (std::size_t i = 0; i < ho; ++i) {
        for (std::size_t j = 0; j < wo; ++j) {
          double s = bias[o];
          for (std::size_t c = 0; c < g.channels; ++c) {
            for (std::size_t ki = 0; ki < k; ++ki) {
              for (std::size_t kj = 0; kj < k; ++kj) {
                const long iy = static_cast<long>(i * g.stride + ki) - static_cast<long>(g.pad);
                const long ix = static_cast<long>(j * g.stride + kj) - static_cast<long>(g.pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.height) || ix >= static_cast<long>(g.width)) continue;
                s += w[o * g.col_rows() + (c * k + ki) * k + kj] *
                     x[c * g.batch * g.height * g.width + b * g.height * g.width + iy * g.width + ix];
              }
            }
          }
          y[o * g.batch * ho * wo + (b * ho + i) * wo + j] = s;
        }
      }
    }
  }
  return y;
}

struct GeomCase {
  ConvGeometry g;
  std::size_t out;
};

class ConvOps : public ::testing::TestWithParam<GeomCase> {};

TEST_P(ConvOps, Im2colGemmMatchesNaive) {
  const auto [g, out] = GetParam();
  Rng rng(17);
  const auto x = randn({g.channels, g.batch * g.height * g.width}, rng);
  const auto w = randn({out, g.col_rows()}, rng);
  const auto b = randn({out}, rng);
  Tensor<double> cols({g.col_rows(), g.col_cols()});
  im2col(x.data(), g, cols.data());
  Tensor<double> y;
  conv_forward(w, b, cols, y);
  const auto ref = naive_conv(x, w, b, g);
  ASSERT_EQ(y.shape, ref.shape);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
}

TEST_P(ConvOps, Col2imIsAdjoint) {
  const auto [g, out] = GetParam();
  Rng rng(5);
  const auto x = randn({g.channels, g.batch * g.height * g.width}, rng);
  const auto c = randn({g.col_rows(), g.col_cols()}, rng);
  Tensor<double> ix({g.col_rows(), g.col_cols()});
  im2col(x.data(), g, ix.data());
  Tensor<double> cx(x.shape);
  col2im(c.data(), g, cx.data());
  EXPECT_NEAR(dot(ix.values, c.values), dot(x.values, cx.values), 1e-10);
}

TEST_P(ConvOps, BackwardIsAdjointOfForward) {
  const auto [g, out] = GetParam();
  Rng rng(9);
  const auto w = randn({out, g.col_rows()}, rng);
  const auto b = randn({out}, rng);
  const auto cols = randn({g.col_rows(), g.col_cols()}, rng);
  const auto dy = randn({out, g.col_cols()}, rng);
  Tensor<double> dw(w.shape), db(b.shape), dcols;
  conv_backward(w, cols, dy, dw, db, dcols);
  // <dy, W dC> = <W^T dy, dC> for any perturbation dC, and likewise for dW.
  const auto pc = randn(cols.shape, rng);
  const auto pw = randn(w.shape, rng);
  Tensor<double> zero_b(b.shape), y1, y2;
  conv_forward(w, zero_b, pc, y1);
  conv_forward(pw, zero_b, cols, y2);
  EXPECT_NEAR(dot(dy.values, y1.values), dot(dcols.values, pc.values), 1e-9);
  EXPECT_NEAR(dot(dy.values, y2.values), dot(dw.values, pw.values), 1e-9);
  for (std::size_t o = 0; o < out; ++o) {
    double s = 0;
    for (std::size_t j = 0; j < g.col_cols(); ++j) s += dy[o * g.col_cols() + j];
    EXPECT_NEAR(db[o], s, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Geometries, ConvOps,
                         ::testing::Values(GeomCase{{3, 2, 8, 8, 3, 2, 1}, 4}, GeomCase{{1, 1, 5, 7, 3, 1, 0}, 2},
                                           GeomCase{{2, 3, 6, 6, 4, 2, 1}, 3}, GeomCase{{4, 1, 1, 1, 3, 2, 1}, 5}));

TEST(Ops, Geometry) {
  const ConvGeometry g{3, 2, 64, 64, 3, 2, 1};
  EXPECT_EQ(g.out_height(), 32u);
  EXPECT_EQ(g.col_rows(), 27u);
  EXPECT_EQ(g.col_cols(), 2u * 32 * 32);
}

TEST(Ops, LinearMatchesDefinition) {
  Rng rng(2);
  const auto w = randn({3, 4}, rng), b = randn({3}, rng), x = randn({2, 4}, rng);
  Tensor<double> y;
  linear_forward(w, b, x, y);
  ASSERT_EQ(y.shape, (std::vector<std::size_t>{2, 3}));
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t o = 0; o < 3; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < 4; ++i) s += w[o * 4 + i] * x[r * 4 + i];
      EXPECT_NEAR(y[r * 3 + o], s, 1e-14);
    }
  }
  Tensor<double> bad({2, 5});
  EXPECT_THROW(linear_forward(w, b, bad, y), Error);
}

TEST(Ops, LinearBackwardAccumulates) {
  Rng rng(4);
  const auto w = randn({3, 4}, rng), x = randn({2, 4}, rng), dy = randn({2, 3}, rng);
  Tensor<double> dw(w.shape), db({3}), dx;
  linear_backward(w, x, dy, dw, db, &dx);
  const auto once = dw;
  linear_backward(w, x, dy, dw, db, static_cast<Tensor<double>*>(nullptr));
  for (std::size_t i = 0; i < dw.size(); ++i) EXPECT_NEAR(dw[i], 2 * once[i], 1e-14);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t i = 0; i < 4; ++i) {
      double s = 0;
      for (std::size_t o = 0; o < 3; ++o) s += dy[r * 3 + o] * w[o * 4 + i];
      EXPECT_NEAR(dx[r * 4 + i], s, 1e-14);
    }
  }
}

TEST(Ops, OrderedSumsAreSequential) {
  Rng rng(8);
  const auto m = randn({3, 37}, rng);
  std::vector<double> rows(3, 1.0), cols(37, 0.0);
  add_row_sums(m, rows.data());
  add_col_sums(m, cols.data());
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 37; ++c) s += m[r * 37 + c];
    EXPECT_EQ(rows[r], 1.0 + s);
  }
  for (std::size_t c = 0; c < 37; ++c) EXPECT_EQ(cols[c], (0.0 + m[c]) + m[37 + c] + m[74 + c]);
}

TEST(Ops, Activations) {
  Tensor<double> x({4}, std::vector<double>{-2.0, 0.0, 0.5, 3.0});
  auto r = x;
  relu_inplace(r);
  EXPECT_EQ(r.values, (std::vector<double>{0.0, 0.0, 0.5, 3.0}));
  Tensor<double> dy({4}, std::vector<double>{1, 1, 1, 1});
  relu_backward_inplace(r, dy);
  EXPECT_EQ(dy.values, (std::vector<double>{0, 0, 1, 1}));
  auto s = x;
  sigmoid_inplace(s);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s[i], 1 / (1 + std::exp(-x[i])), 1e-15);
  Tensor<float> big({2}, std::vector<float>{-200.0f, 200.0f});
  sigmoid_inplace(big);
  EXPECT_TRUE(big.all_finite());
}

TEST(Ops, AveragePoolAndAdjoint) {
  Rng rng(6);
  const std::size_t c = 3, b = 2, hw = 5;
  const auto x = randn({c, b * hw}, rng);
  const auto y = global_avg_pool(x, b, hw);
  ASSERT_EQ(y.shape, (std::vector<std::size_t>{b, c}));
  double s = 0;
  for (std::size_t i = 0; i < hw; ++i) s += x[2 * b * hw + 1 * hw + i];
  EXPECT_NEAR(y[1 * c + 2], s / hw, 1e-15);
  const auto dy = randn({b, c}, rng);
  const auto dx = global_avg_pool_backward(dy, c, b, hw);
  EXPECT_NEAR(dot(dy.values, y.values), dot(dx.values, x.values), 1e-12);
}

TEST(Tensor, Basics) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.rows(), 2);
  EXPECT_EQ(t.cols(), 12);
  t[5] = std::nanf("");
  EXPECT_FALSE(t.all_finite());
  EXPECT_EQ(shape_string(t.shape), "(2,3,4)");
  EXPECT_THROW(require_shape(t, {2, 12}, "t"), Error);
}

TEST(ParamStore, NamesAndInit) {
  ParamStore<float> p;
  const auto w = p.add("w", {4, 6});
  p.add("b", {4});
  EXPECT_THROW(p.add("w", {1}), Error);
  EXPECT_EQ(p.num_scalars(), 28u);
  EXPECT_EQ(p.find("b"), 1u);
  EXPECT_FALSE(p.find("c"));
  EXPECT_EQ(p.at("w").grad.shape, p.at("w").value.shape);
  Rng rng(1);
  p.kaiming_uniform(w, 6, rng);
  const double bound = std::sqrt(6.0 / 6.0);
  for (float v : p[w].value.values) EXPECT_LE(std::abs(v), bound);
  p[w].grad.fill(3.0f);
  p.zero_grad();
  for (float v : p[w].grad.values) EXPECT_EQ(v, 0.0f);
}

}  // namespace
}  // namespace glyphembed::nn
