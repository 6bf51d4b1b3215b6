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

#include "detail/ascent.hpp"

#include <algorithm>
#include <cmath>

namespace rgpis::detail {

AscentResult gradient_ascent(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                             double fx, const std::vector<double>& lo, const std::vector<double>& hi,
                             int max_iters, double h, double rel_tol) {
  AscentResult res;
  const std::size_t d = x.size();
  auto clamp = [&](std::vector<double>& v) {
    for (std::size_t k = 0; k < d; ++k) v[k] = std::clamp(v[k], lo[k], hi[k]);
  };
  double step = -1.0;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> g(d);
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<double> xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      g[k] = (f(xp) - f(xm)) / (2.0 * h);
      // Do not push against an active bound.
      if ((x[k] >= hi[k] && g[k] > 0.0) || (x[k] <= lo[k] && g[k] < 0.0)) g[k] = 0.0;
    }
    double g2 = 0.0;
    for (double v : g) g2 += v * v;
    const double gnorm = std::sqrt(g2);
    if (!(gnorm > 1e-9 * std::max(1.0, std::abs(fx)))) break;
    if (step < 0.0) step = 0.1 / gnorm;

    bool accepted = false;
    double t = step;
    std::vector<double> xn(d);
    double fn = fx;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < d; ++k) xn[k] = x[k] + t * g[k];
      clamp(xn);
      fn = f(xn);
      if (std::isfinite(fn) && fn >= fx + 1e-4 * t * g2 && fn > fx) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }
    const double gain = fn - fx;
    x = xn;
    fx = fn;
    res.moved = true;
    step = 2.0 * t;
    if (gain <= rel_tol * std::max(1.0, std::abs(fx))) break;
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}


}  // namespace rgpis::detail
