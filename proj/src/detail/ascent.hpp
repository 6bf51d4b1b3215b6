/*
 * Copyright 2026 The rgpis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Internal optimiser shared by the hyperparameter fits.

#include <functional>
#include <vector>

namespace rgpis::detail {

struct AscentResult {
  std::vector<double> x;
  double value = 0.0;
  bool moved = false;
  bool line_search_failed = false;
};

/// Gradient ascent with central finite differences (step h) and Armijo
/// backtracking inside the box [lo, hi]. Stops when the gradient norm falls
/// below 1e-9 max(1, |f|), when a step gains less than rel_tol max(1, |f|),
/// or after max_iters steps.
AscentResult gradient_ascent(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                             double fx, const std::vector<double>& lo, const std::vector<double>& hi, int max_iters,
                             double h, double rel_tol);

}  // namespace rgpis::detail
