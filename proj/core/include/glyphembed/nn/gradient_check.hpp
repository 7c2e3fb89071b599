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
#include <functional>
#include <string>
#include <vector>

#include "glyphembed/nn/param_store.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::nn {

// One scalar parameter to probe: where it lives in the extended-precision
// model the loss closure evaluates, and the reverse-mode gradient reported for
// it by the 32- or 64-bit model under test.
struct GradProbe {
  std::string name;
  long double* value = nullptr;
  double analytic = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[<flat index>]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t probed = 0;
};

// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

// Central differences (L(x+h) - L(x-h)) / 2h at every probe, restoring each
// value afterwards. The loss runs in long double so that rounding in L stays
// far below h times the smallest gradient being checked. Throws NonFiniteLoss
// if any evaluation is not finite.
GradCheckResult gradient_check(const std::function<long double()>& loss, std::vector<GradProbe> probes, double h = 1e-5);

// Picks up to `per_tensor` distinct entries of every tensor in `values` and
// pairs them with the matching gradient from `grads` (same names and shapes).
template <typename G>
std::vector<GradProbe> sample_probes(ParamStore<long double>& values, const ParamStore<G>& grads, std::size_t per_tensor,
                                     Rng& rng, const std::string& prefix = "");

}  // namespace glyphembed::nn
