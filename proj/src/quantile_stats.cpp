#include "gevmq/quantile_stats.hpp"

#include <algorithm>
#include <cmath>

#include "gevmq/errors.hpp"

namespace gevmq {

PercentileTriple::PercentileTriple(double a, double b, double c) : q1(a), q2(b), q3(c) {
  if (!(a > 0.0 && a < b && b < c && c < 1.0))
    throw DomainError("percentile triple must satisfy 0 < q1 < q2 < q3 < 1");
}

SortedSample::SortedSample(std::span<const double> data) : z_(data.begin(), data.end()) {
  if (z_.size() < 2) throw DomainError("empirical quantiles need at least 2 observations");
  std::sort(z_.begin(), z_.end());
}

SortedSample::SortedSample(std::vector<double>&& data) : z_(std::move(data)) {
  if (z_.size() < 2) throw DomainError("empirical quantiles need at least 2 observations");
  std::sort(z_.begin(), z_.end());
}

double SortedSample::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("probability must lie in (0,1)");
  const double h = static_cast<double>(z_.size() - 1) * q;
  const auto j = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(j);
  if (j + 1 >= z_.size()) return z_.back();
  return z_[j] + frac * (z_[j + 1] - z_[j]);
}

double empirical_quantile(std::span<const double> data, double q) {
  return SortedSample(data).quantile(q);
}

double inverse_density_at(const GevParams& theta, double q) {
  const double mlq = -std::log(q);
  return theta.sigma / (q * std::exp((1.0 + theta.xi) * std::log(mlq)));
}

namespace {
double kernel(double a, double b) { return std::min(a, b) - a * b; }
}  // namespace

Eigen::MatrixXd sigma_T(const GevParams& theta, std::span<const double> q) {
  const auto k = static_cast<Eigen::Index>(q.size());
  Eigen::VectorXd d(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double qi = q[static_cast<std::size_t>(i)];
    if (!(qi > 0.0 && qi < 1.0)) throw DomainError("percentiles must lie in (0,1)");
    for (Eigen::Index j = 0; j < i; ++j)
      if (q[static_cast<std::size_t>(j)] == qi) throw DomainError("percentiles must be distinct");
    d(i) = inverse_density_at(theta, qi);
  }
  Eigen::MatrixXd s(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      s(i, j) = s(j, i) = d(i) * d(j) * kernel(q[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(j)]);
  return s;
}

Eigen::Matrix3d sigma_T(const GevParams& theta, const PercentileTriple& q) {
  return cross_cov_K(theta, q, q);
}

Eigen::Matrix3d cross_cov_K(const GevParams& theta, const PercentileTriple& qs,
                            const PercentileTriple& qt) {
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i) {
    const double di = inverse_density_at(theta, qs[i]);
    for (int j = 0; j < 3; ++j)
      k(i, j) = di * inverse_density_at(theta, qt[j]) * kernel(qs[i], qt[j]);
  }
  return k;
}

}  // namespace gevmq
