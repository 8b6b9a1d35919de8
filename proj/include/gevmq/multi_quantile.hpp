#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gevmq/gev.hpp"
#include "gevmq/quantile_stats.hpp"
#include "gevmq/rng.hpp"
#include "gevmq/triple.hpp"

namespace gevmq {

// A set of distinct percentile triples, optionally with weights summing to 1.
struct TripleSet {
  std::vector<PercentileTriple> triples;
  std::vector<double> weights;

  TripleSet() = default;
  // Throws DomainError on an empty list or repeated triples.
  explicit TripleSet(std::vector<PercentileTriple> t);

  std::size_t size() const { return triples.size(); }
  // Sorted distinct percentiles used by the set.
  std::vector<double> distinct_percentiles() const;
};

// Asymptotic covariance of the per-triple xi estimators.
struct LambdaMatrix {
  Eigen::MatrixXd values;
  double xi_at = 0.0;
  // Optional B with values = B^T B; carried when exact weights are needed.
  Eigen::MatrixXd sqrt_factor;

  Eigen::Index size() const { return values.rows(); }
  // lambda_min / lambda_max. Diagnostic only: for sets drawn from an
  // equidistant grid this is ~1e-17 because every W row annihilates the
  // constant and quantile vectors.
  double rcond() const;
};

LambdaMatrix lambda_matrix(const TripleSet& M, const GevParams& theta, bool with_factor = false);
LambdaMatrix lambda_matrix(const TripleSet& M, double xi, bool with_factor = false);
// Direct W K W^T per block, no threading. Reference for tests and benchmarks.
LambdaMatrix lambda_matrix_serial(const TripleSet& M, const GevParams& theta);

// Relative eigenvalue cutoff used by fits; equals 1e-3 on the singular values of B.
inline constexpr double kPracticalEigenCutoff = 1e-6;
// Relative singular-value cutoff on B for theoretical tau2_opt.
inline constexpr double kExactFactorCutoff = 1e-10;

struct WeightSolution {
  Eigen::VectorXd w;
  double tau2 = 0.0;
  Eigen::Index rank = 0;
  bool has_negative = false;
};

// Minimum-variance weights summing to 1 through a truncated eigen pseudo-inverse.
// Throws RobustnessError when Lambda is non-finite or z has no usable component.
WeightSolution optimal_weights(const LambdaMatrix& L, double rel_cutoff = kPracticalEigenCutoff);
// Same through the SVD of the square-root factor (L must carry it).
WeightSolution optimal_weights_exact(const LambdaMatrix& L, double rel_cutoff = kExactFactorCutoff);

// m distinct triples from E(m+2) = {1/(m+2), ..., (m+1)/(m+2)}, in draw order.
TripleSet select_random_triples(std::size_t m, Rng& rng);
// m distinct triples from E(r), r given.
TripleSet select_random_triples_on_grid(std::size_t m, std::size_t r, Rng& rng);

// True when the constant vector lies in the numerical range of Lambda(xi).
bool is_robust(const TripleSet& M, double xi);
// Redraws up to max_tries sets; RobustnessError after that.
TripleSet select_robust_triples(std::size_t m, double xi, Rng& rng, int max_tries = 100);

double tau2_opt_exact(const TripleSet& M, double xi);

struct MqOptions {
  int iters = 5;
  double eig_cutoff = kPracticalEigenCutoff;
};

struct MqXiResult {
  double xi_hat = 0.0;
  Eigen::VectorXd weights;
  std::vector<double> eta;          // per-triple estimates of the used triples
  TripleSet used;                   // M without dropped triples
  std::vector<std::size_t> dropped; // indices into the input set
  double tau2 = 0.0;                // w Lambda w^T at the final iterate
  bool negative_weights = false;
};

// Minimum sample size for a set of m triples.
std::size_t mq_min_sample(std::size_t m);

MqXiResult estimate_xi_iterative(const TripleSet& M, const SortedSample& data, const MqOptions& opt = {});
MqXiResult estimate_xi_iterative(const TripleSet& M, std::span<const double> data, const MqOptions& opt = {});

struct MqFit {
  GevParams theta;
  MqXiResult xi;
};

MqFit estimate_theta_mq(const TripleSet& M, const SortedSample& data, const MqOptions& opt = {});
MqFit estimate_theta_mq(const TripleSet& M, std::span<const double> data, const MqOptions& opt = {});

struct Tau2Point {
  std::size_t m;
  double tau2;
};

// One robust set per m, each on its own grid E(m+2).
std::vector<Tau2Point> tau2_opt_curve(double xi, std::span<const std::size_t> m_values, Rng& rng);
// Prefixes of one random order on E(max m + 2), so each set contains the previous one.
std::vector<Tau2Point> tau2_opt_nested(double xi, std::span<const std::size_t> m_values, Rng& rng);

}  // namespace gevmq
