#include "gevmq/gev.hpp"

#include <cmath>
#include <limits>

#include "gevmq/errors.hpp"

namespace gevmq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(double xi) { return std::fabs(xi) < kGumbelSwitch; }
}  // namespace

GevParams::GevParams(double xi_, double mu_, double sigma_) : xi(xi_), mu(mu_), sigma(sigma_) {
  if (!std::isfinite(xi) || !std::isfinite(mu))
    throw DomainError("GEV parameters xi and mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DomainError("GEV scale sigma must be positive and finite");
}

double loglog(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("probability must lie in (0,1)");
  return std::log(-std::log(q));
}

double shape_q(double xi, double LL) {
  if (gumbel(xi)) return -LL;
  return std::expm1(-xi * LL) / xi;
}

SupportInterval support(const GevParams& t) {
  if (gumbel(t.xi)) return {-kInf, kInf};
  const double end = t.mu - t.sigma / t.xi;
  if (t.xi > 0) return {end, kInf};
  return {-kInf, end};
}

double cdf(const GevParams& t, double y) {
  const double z = (y - t.mu) / t.sigma;
  if (gumbel(t.xi)) return std::exp(-std::exp(-z));
  const double arg = t.xi * z;
  if (arg <= -1.0) return t.xi > 0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(arg) / t.xi));
}

double log_pdf(const GevParams& t, double y) {
  const double z = (y - t.mu) / t.sigma;
  const double ls = std::log(t.sigma);
  if (gumbel(t.xi)) return -ls - z - std::exp(-z);
  const double arg = t.xi * z;
  if (arg <= -1.0) return -kInf;
  const double lt = std::log1p(arg);
  return -ls - (1.0 + 1.0 / t.xi) * lt - std::exp(-lt / t.xi);
}

double pdf(const GevParams& t, double y) { return std::exp(log_pdf(t, y)); }

double quantile(const GevParams& t, double q) { return t.mu + t.sigma * shape_q(t.xi, loglog(q)); }

void sample_into(const GevParams& t, std::span<double> out, Rng& rng) {
  for (double& v : out) v = t.mu + t.sigma * shape_q(t.xi, std::log(-std::log(rng.uniform())));
}

std::vector<double> sample(const GevParams& t, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("sample size must be at least 1");
  std::vector<double> out(n);
  sample_into(t, out, rng);
  return out;
}

double log_likelihood(const GevParams& t, std::span<const double> data) {
  if (data.empty()) throw DomainError("log-likelihood needs at least one observation");
  double s = 0.0;
  for (double y : data) {
    const double lp = log_pdf(t, y);
    if (lp == -kInf) return -kInf;
    s += lp;
  }
  return s;
}

}  // namespace gevmq
