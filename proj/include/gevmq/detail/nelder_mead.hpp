#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace gevmq::detail {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x;
  double fx;
  int evals;
  bool converged;
};

// Plain Nelder-Mead minimizer. f may return +inf for infeasible points.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& x0, const std::array<double, N>& step,
                             int max_evals, double ftol, double xtol) {
  using Pt = std::array<double, N>;
  std::array<Pt, N + 1> p;
  std::array<double, N + 1> fv;
  int evals = 0;
  auto eval = [&](const Pt& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  p[0] = x0;
  fv[0] = eval(x0);
  for (std::size_t i = 0; i < N; ++i) {
    p[i + 1] = x0;
    p[i + 1][i] += step[i];
    fv[i + 1] = eval(p[i + 1]);
  }
  std::array<std::size_t, N + 1> idx;
  bool converged = false;
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= N; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0], worst = idx[N], second = idx[N - 1];

    double xspread = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t d = 0; d < N; ++d) xspread = std::max(xspread, std::fabs(p[idx[i]][d] - p[best][d]));
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= ftol * (1.0 + std::fabs(fv[best])) && xspread <= xtol) {
      converged = true;
      break;
    }

    Pt c{};
    for (std::size_t i = 0; i <= N; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < N; ++d) c[d] += p[i][d] / static_cast<double>(N);
    auto along = [&](double t) {
      Pt x;
      for (std::size_t d = 0; d < N; ++d) x[d] = c[d] + t * (p[worst][d] - c[d]);
      return x;
    };
    const Pt xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const Pt xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) { p[worst] = xe; fv[worst] = fe; } else { p[worst] = xr; fv[worst] = fr; }
    } else if (fr < fv[second]) {
      p[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Pt xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        p[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= N; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < N; ++d) p[i][d] = p[best][d] + 0.5 * (p[i][d] - p[best][d]);
          fv[i] = eval(p[i]);
        }
      }
    }
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i <= N; ++i)
    if (fv[i] < fv[b]) b = i;
  return {p[b], fv[b], evals, converged};
}

}  // namespace gevmq::detail
