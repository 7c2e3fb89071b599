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

#include "glyphembed/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphembed/error.hpp"

namespace glyphembed::nn {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult gradient_check(const std::function<long double()>& loss, std::vector<GradProbe> probes, double h) {
  GradCheckResult result;
  for (auto& p : probes) {
    const long double saved = *p.value;
    *p.value = saved + h;
    const long double up = loss();
    *p.value = saved - h;
    const long double down = loss();
    *p.value = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss is not finite while probing " + p.name);
    }
    const auto numeric = static_cast<double>((up - down) / (2.0L * h));
    const double err = relative_error(p.analytic, numeric);
    if (err > result.max_rel_error || result.probed == 0) {
      result.max_rel_error = err;
      result.worst = p.name;
      result.worst_analytic = p.analytic;
      result.worst_numeric = numeric;
    }
    ++result.probed;
  }
  return result;
}

template <typename G>
std::vector<GradProbe> sample_probes(ParamStore<long double>& values, const ParamStore<G>& grads, std::size_t per_tensor,
                                     Rng& rng, const std::string& prefix) {
  std::vector<GradProbe> out;
  for (std::size_t t = 0; t < values.size(); ++t) {
    auto& e = values[t];
    const auto& g = grads.at(e.name);
    if (g.grad.shape != e.value.shape) throw Error(ErrorCode::ShapeMismatch, "gradient shape differs for " + e.name);
    std::vector<std::size_t> idx(e.value.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t take = std::min(per_tensor, idx.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
      out.push_back({prefix + e.name + "[" + std::to_string(idx[i]) + "]", &e.value[idx[i]],
                     static_cast<double>(g.grad[idx[i]])});
    }
  }
  return out;
}

template std::vector<GradProbe> sample_probes(ParamStore<long double>&, const ParamStore<float>&, std::size_t, Rng&,
                                              const std::string&);
template std::vector<GradProbe> sample_probes(ParamStore<long double>&, const ParamStore<double>&, std::size_t, Rng&,
                                              const std::string&);

}  // namespace glyphembed::nn
