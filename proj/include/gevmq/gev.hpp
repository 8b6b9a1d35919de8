#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gevmq/rng.hpp"

namespace gevmq {

// |xi| below this uses the Gumbel formulas.
inline constexpr double kGumbelSwitch = 1e-9;

struct GevParams {
  double xi = 0.0;
  double mu = 0.0;
  double sigma = 1.0;

  GevParams() = default;
  // Throws DomainError unless xi, mu finite and sigma > 0.
  GevParams(double xi, double mu, double sigma);
};

struct SupportInterval {
  double lo;
  double hi;
  bool contains(double y) const { return y > lo && y < hi; }
};

// log(-log q) for q in (0,1).
double loglog(double q);

// Standardized quantile term Q = (exp(-xi*LL) - 1)/xi, with the -LL limit at xi = 0.
double shape_q(double xi, double LL);

SupportInterval support(const GevParams& theta);
double cdf(const GevParams& theta, double y);
double pdf(const GevParams& theta, double y);
// -inf outside the support.
double log_pdf(const GevParams& theta, double y);
double quantile(const GevParams& theta, double q);

// n iid draws by inverse transform.
std::vector<double> sample(const GevParams& theta, std::size_t n, Rng& rng);
void sample_into(const GevParams& theta, std::span<double> out, Rng& rng);

// Sum of log densities; -inf as soon as one point is outside the support.
double log_likelihood(const GevParams& theta, std::span<const double> data);

}  // namespace gevmq
