#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gevmq/gev.hpp"
#include "gevmq/triple.hpp"

namespace gevmq {

// Sorted copy of a sample; quantiles by linear interpolation of order
// statistics with h = (n-1) q.
class SortedSample {
 public:
  explicit SortedSample(std::span<const double> data);
  explicit SortedSample(std::vector<double>&& data);

  double quantile(double q) const;
  std::size_t size() const { return z_.size(); }
  const std::vector<double>& values() const { return z_; }

 private:
  std::vector<double> z_;
};

// Convenience wrapper that sorts on every call. n >= 2.
double empirical_quantile(std::span<const double> data, double q);

// sigma / density at the q-quantile: sigma / (q (-log q)^(1+xi)).
double inverse_density_at(const GevParams& theta, double q);

// Asymptotic covariance of sqrt(N)(T_hat - T) for distinct percentiles.
Eigen::MatrixXd sigma_T(const GevParams& theta, std::span<const double> q);
Eigen::Matrix3d sigma_T(const GevParams& theta, const PercentileTriple& q);

// Cross block between the empirical quantiles of two triples.
Eigen::Matrix3d cross_cov_K(const GevParams& theta, const PercentileTriple& qs,
                            const PercentileTriple& qt);

}  // namespace gevmq
