#include "gevmq/classical.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "gevmq/detail/nelder_mead.hpp"
#include "gevmq/errors.hpp"
#include "gevmq/gev.hpp"
#include "gevmq/quantile_stats.hpp"
#include "gevmq/three_quantile.hpp"

namespace gevmq {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286061;

FitResult failed(Estimator e, std::string reason, double xi = kNaN) {
  FitResult r;
  r.estimator = e;
  r.xi_hat = xi;
  r.valid = false;
  r.failure_reason = std::move(reason);
  return r;
}
}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::MQ: return "MQ";
    case Estimator::MLE: return "MLE";
    case Estimator::PWM: return "PWM";
    case Estimator::DEH: return "DEH";
  }
  return "?";
}

Estimator estimator_from_string(std::string_view name) {
  std::string s(name);
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "MQ") return Estimator::MQ;
  if (s == "MLE") return Estimator::MLE;
  if (s == "PWM") return Estimator::PWM;
  if (s == "DEH" || s == "DHE") return Estimator::DEH;
  throw DomainError("unknown estimator '" + std::string(name) + "' (expected mq, mle, pwm or deh)");
}

// ---------------------------------------------------------------- PWM

double pwm_ratio(double x) {
  const double l3 = std::log(3.0), l2 = std::log(2.0);
  if (x == 0.0) return l3 / l2;
  return std::expm1(x * l3) / std::expm1(x * l2);
}

namespace {
double pwm_ratio_derivative(double x) {
  const double a = std::log(3.0), b = std::log(2.0);
  if (std::fabs(x) < 1e-6) return a * (a - b) / (2.0 * b);
  const double A = std::expm1(x * a), B = std::expm1(x * b);
  return (a * std::exp(x * a) * B - b * std::exp(x * b) * A) / (B * B);
}
}  // namespace

FitResult pwm_fit(std::span<const double> data) {
  if (data.size() < 3) throw DomainError("PWM needs at least 3 observations");
  std::vector<double> z(data.begin(), data.end());
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double b0 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double k = static_cast<double>(i);  // i-1 in 1-based indexing
    b0 += z[i];
    b1 += k / (n - 1) * z[i];
    b2 += k * (k - 1) / ((n - 1) * (n - 2)) * z[i];
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double den = 2 * b1 - b0;
  if (!(den > 0.0)) return failed(Estimator::PWM, "degenerate sample (2 beta1 - beta0 <= 0)");
  const double R = (3 * b2 - b0) / den;
  const double xmax = 0.5 - 1e-9;
  if (!(R > 1.0)) return failed(Estimator::PWM, "no root: moment ratio <= 1");
  if (R >= pwm_ratio(xmax)) return failed(Estimator::PWM, "no root in (-inf, 0.5): estimator undefined for xi >= 0.5");

  double lo = -20.0, hi = xmax;
  while (pwm_ratio(lo) > R) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e6) return failed(Estimator::PWM, "root bracket expansion failed");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = pwm_ratio(x) - R;
    if (f == 0.0) break;
    if (f < 0) lo = x; else hi = x;
    const double d = pwm_ratio_derivative(x);
    double next = d > 0 ? x - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::fabs(next - x) <= 1e-15 * (1 + std::fabs(x)) || hi - lo <= 1e-15 * (1 + std::fabs(x));
    x = next;
    if (done) break;
  }
  FitResult r;
  r.estimator = Estimator::PWM;
  r.xi_hat = x;
  r.valid = true;
  return r;
}

// ---------------------------------------------------------------- DEH

FitResult deh_fit(std::span<const double> data, std::size_t k, DehFormula formula) {
  const std::size_t n = data.size();
  if (k < 1 || k >= n) throw DomainError("DEH needs 1 <= k < n");
  std::vector<double> z(data.begin(), data.end());
  // Only the top k+1 order statistics matter.
  std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n - k - 1), z.end());
  const double thr = z[n - k - 1];
  if (!(thr > 0.0)) return failed(Estimator::DEH, "threshold order statistic is not positive");
  double h1 = 0, h2 = 0;
  for (std::size_t i = n - k; i < n; ++i) {
    const double l = std::log(z[i] / thr);
    h1 += l;
    h2 += l * l;
  }
  h1 /= static_cast<double>(k);
  h2 /= static_cast<double>(k);
  if (!(h2 > 0.0)) return failed(Estimator::DEH, "degenerate tail (H2 = 0)");
  const double rho = h1 * h1 / h2;
  const double xi = formula == DehFormula::Printed ? h1 + 2 * rho - 1 : h1 + 1 - 0.5 / (1 - rho);
  if (!std::isfinite(xi)) return failed(Estimator::DEH, "non-finite estimate");
  FitResult r;
  r.estimator = Estimator::DEH;
  r.xi_hat = xi;
  r.valid = true;
  return r;
}

// ---------------------------------------------------------------- MLE

namespace {

using V3 = std::array<double, 3>;  // (xi, mu, log sigma)

double nll(const V3& v, std::span<const double> data) {
  if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]) || std::fabs(v[2]) > 700) return kInf;
  const GevParams t(v[0], v[1], std::exp(v[2]));
  return -log_likelihood(t, data);
}

// mu, sigma by least squares of empirical quantiles on Q(xi).
bool location_scale_for(double xi, const SortedSample& s, double& mu, double& sigma) {
  double sq = 0, st = 0, sqq = 0, sqt = 0, k = 0;
  for (int i = 1; i <= 19; ++i) {
    const double q = 0.05 * i;
    const double Q = shape_q(xi, loglog(q));
    const double T = s.quantile(q);
    sq += Q; st += T; sqq += Q * Q; sqt += Q * T; k += 1;
  }
  sigma = (k * sqt - sq * st) / (k * sqq - sq * sq);
  mu = (st - sigma * sq) / k;
  return sigma > 0 && std::isfinite(sigma) && std::isfinite(mu);
}

// Pull xi toward 0 until every point is inside the support.
bool make_feasible(V3& v, std::span<const double> data) {
  for (int i = 0; i < 40; ++i) {
    if (std::isfinite(nll(v, data))) return true;
    v[0] *= 0.5;
    if (std::fabs(v[0]) < 1e-6) v[0] = 0.0;
  }
  return std::isfinite(nll(v, data));
}

// Score of the log-likelihood in (xi, mu, log sigma).
Eigen::Vector3d score(const V3& v, std::span<const double> data) {
  const double xi = v[0], mu = v[1], sigma = std::exp(v[2]);
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (double y : data) {
    const double z = (y - mu) / sigma;
    if (std::fabs(xi) < 1e-7) {
      const double e = std::exp(-z);
      g(0) += 0.5 * z * z * (1 - e) - z;  // xi -> 0 limit
      g(1) += (1 - e) / sigma;
      g(2) += -1 + z * (1 - e);
      continue;
    }
    const double t = 1 + xi * z;
    if (!(t > 0)) return Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
    const double lt = std::log(t);
    const double u = std::exp(-lt / xi);
    g(0) += (1 - u) * lt / (xi * xi) - z / t * (1 + (1 - u) / xi);
    g(1) += (1 + xi - u) / (sigma * t);
    g(2) += -1 + z * (1 + xi - u) / t;
  }
  return g;
}

V3 newton_polish(V3 v, std::span<const double> data, int steps) {
  for (int it = 0; it < steps; ++it) {
    const double f0 = nll(v, data);
    const Eigen::Vector3d g = score(v, data);
    if (!g.allFinite()) break;
    Eigen::Matrix3d H;  // Hessian of the log-likelihood
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-6 * (i == 1 ? std::exp(v[2]) : 1.0);
      V3 a = v, b = v;
      a[static_cast<std::size_t>(i)] += h;
      b[static_cast<std::size_t>(i)] -= h;
      H.col(i) = (score(a, data) - score(b, data)) / (2 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();
    if (!H.allFinite()) break;
    Eigen::LLT<Eigen::Matrix3d> llt(-H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::Vector3d d = llt.solve(g);
    double t = 1.0;
    bool moved = false;
    for (int b = 0; b < 30; ++b, t *= 0.5) {
      const V3 w{v[0] + t * d(0), v[1] + t * d(1), v[2] + t * d(2)};
      const double fw = nll(w, data);
      if (fw <= f0 || (std::isfinite(fw) && score(w, data).norm() < g.norm() && fw <= f0 + 1e-9 * std::fabs(f0))) {
        v = w;
        moved = true;
        break;
      }
    }
    if (!moved || g.norm() < 1e-10) break;
  }
  return v;
}

}  // namespace

FitResult mle_fit(std::span<const double> data, const MleOptions& opt) {
  if (data.size() < 10) throw DomainError("MLE needs at least 10 observations");
  const SortedSample sorted(data);

  std::vector<V3> starts;
  {
    const FitResult p = pwm_fit(data);
    double mu = 0, sigma = 0;
    if (p.valid && location_scale_for(p.xi_hat, sorted, mu, sigma)) starts.push_back({p.xi_hat, mu, std::log(sigma)});
  }
  try {
    const PercentileTriple q(0.1, 0.5, 0.9);
    const GevParams t = estimate_theta(q, {sorted.quantile(0.1), sorted.quantile(0.5), sorted.quantile(0.9)});
    starts.push_back({t.xi, t.mu, std::log(t.sigma)});
  } catch (const std::exception&) {
  }
  {
    const double n = static_cast<double>(data.size());
    const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
    double ss = 0;
    for (double y : data) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / (n - 1));
    const double sigma = sd * std::sqrt(6.0) / M_PI;
    if (sigma > 0) starts.push_back({0.0, mean - kEulerGamma * sigma, std::log(sigma)});
  }

  V3 best{};
  double fbest = kInf;
  for (V3 v : starts) {
    if (!make_feasible(v, data)) continue;
    auto f = [&](const V3& x) { return nll(x, data); };
    const double sig = std::exp(v[2]);
    auto r = detail::nelder_mead<3>(f, v, {0.1, 0.2 * sig, 0.1}, opt.max_evals, 1e-8, 1e-4);
    // Restart once from the simplex optimum to escape premature collapse.
    r = detail::nelder_mead<3>(f, r.x, {0.02, 0.02 * std::exp(r.x[2]), 0.02}, opt.max_evals, 1e-9, 1e-5);
    if (r.fx < fbest) {
      fbest = r.fx;
      best = r.x;
    }
  }
  if (!std::isfinite(fbest)) return failed(Estimator::MLE, "optimizer found no feasible point");
  best = newton_polish(best, data, opt.polish_steps);

  FitResult res;
  res.estimator = Estimator::MLE;
  res.xi_hat = best[0];
  res.mu_hat = best[1];
  res.sigma_hat = std::exp(best[2]);
  res.valid = true;
  double tmin = kInf;
  for (double y : data) tmin = std::min(tmin, 1.0 + best[0] * (y - best[1]) / *res.sigma_hat);
  if (best[0] < 0 && tmin < 1e-8) {
    res.valid = false;
    res.failure_reason = "optimizer hit the support boundary";
  } else if (best[0] <= -0.5) {
    res.valid = false;
    res.failure_reason = "xi_hat <= -0.5: outside asymptotic-normality range";
  }
  return res;
}

}  // namespace gevmq
