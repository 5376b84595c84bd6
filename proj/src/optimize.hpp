#pragma once

#include "akr/field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace akr::detail {

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  int evaluations = 0;
};

// Plain Nelder-Mead with an axis-aligned initial simplex of size `step`.
// Stops when the simplex values agree to ftol (relative) and its diameter is below xtol.
inline NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double step,
                                    int max_evals, double ftol = 1e-6, double xtol = 1e-3) {
  const int d = static_cast<int>(x0.size());
  std::vector<Vec> x(d + 1, x0);
  std::vector<double> fx(d + 1);
  for (int i = 1; i <= d; ++i) x[i](i - 1) += step;
  int evals = 0;
  for (int i = 0; i <= d; ++i, ++evals) fx[i] = f(x[i]);
  std::vector<int> idx(d + 1);
  while (evals < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int b = idx[0], w = idx[d], m = idx[d - 1];
    double diam = 0.0;
    for (int i = 1; i <= d; ++i) diam = std::max(diam, (x[idx[i]] - x[b]).norm());
    if (std::abs(fx[w] - fx[b]) <= ftol * std::abs(fx[b]) && diam < xtol) break;
    Vec c = Vec::Zero(d);
    for (int i = 0; i < d; ++i) c += x[idx[i]];
    c /= d;
    const Vec xr = c + (c - x[w]);
    const double fr = f(xr);
    ++evals;
    if (fr < fx[b]) {
      const Vec xe = c + 2.0 * (c - x[w]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        x[w] = xe;
        fx[w] = fe;
      } else {
        x[w] = xr;
        fx[w] = fr;
      }
    } else if (fr < fx[m]) {
      x[w] = xr;
      fx[w] = fr;
    } else {
      const Vec xc = c + 0.5 * (x[w] - c);
      const double fc = f(xc);
      ++evals;
      if (fc < fx[w]) {
        x[w] = xc;
        fx[w] = fc;
      } else {
        for (int i = 1; i <= d; ++i) {
          x[idx[i]] = x[b] + 0.5 * (x[idx[i]] - x[b]);
          fx[idx[i]] = f(x[idx[i]]);
          ++evals;
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {x[best], fx[best], evals};
}

}  // namespace akr::detail
