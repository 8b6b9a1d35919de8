#include <doctest.h>

#include <cmath>
#include <vector>

#include "gevmq/errors.hpp"
#include "gevmq/quantile_stats.hpp"

using namespace gevmq;

TEST_CASE("empirical quantile interpolation") {
  const std::vector<double> odd{5, 3, 1, 4, 2};
  CHECK(empirical_quantile(odd, 0.5) == 3.0);
  const std::vector<double> even{4, 1, 3, 2};
  CHECK(empirical_quantile(even, 0.5) == 2.5);
  CHECK(empirical_quantile(even, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1.0}, 0.5), DomainError);
  CHECK_THROWS_AS(empirical_quantile(even, 0.0), DomainError);
  CHECK_THROWS_AS(empirical_quantile(even, 1.0), DomainError);
}

TEST_CASE("empirical quantile is monotone and affine equivariant") {
  Rng rng(3);
  const auto x = sample(GevParams(0.1, 0, 1), 257, rng);
  const SortedSample s(x);
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v - 2.0);
  const SortedSample sy(y);
  double prev = -1e300;
  for (int k = 1; k < 200; ++k) {
    const double q = k / 200.0;
    const double v = s.quantile(q);
    CHECK(v >= prev);
    prev = v;
    CHECK(sy.quantile(q) == doctest::Approx(3.0 * v - 2.0).epsilon(1e-12));
  }
}

TEST_CASE("empirical quantile is consistent") {
  Rng rng(5);
  const auto x = sample(GevParams(0.2, 0, 1), 100000, rng);
  CHECK(std::fabs(empirical_quantile(x, 0.9) - quantile(GevParams(0.2, 0, 1), 0.9)) < 0.05);
}

TEST_CASE("sigma_T scalar case") {
  const std::vector<double> q{0.5};
  const auto S = sigma_T(GevParams(0, 0, 1), q);
  const double l = std::log(0.5);
  CHECK(S(0, 0) == doctest::Approx(0.25 / (0.25 * l * l)).epsilon(1e-14));
  CHECK(S(0, 0) == doctest::Approx(2.0814).epsilon(1e-4));
}

TEST_CASE("sigma_T matches the density form and scales with sigma^2") {
  const std::vector<double> q{0.25, 0.5, 0.75};
  const GevParams t(0.2, 0, 1), u(0.2, 5, 3);
  const auto A = sigma_T(t, q), B = sigma_T(u, q);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // Independent form: (min - q q) / (f(T_i) f(T_j)).
      const double qi = q[static_cast<std::size_t>(i)], qj = q[static_cast<std::size_t>(j)];
      const double ref = (std::min(qi, qj) - qi * qj) / (pdf(t, quantile(t, qi)) * pdf(t, quantile(t, qj)));
      CHECK(A(i, j) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(B(i, j) == doctest::Approx(9.0 * A(i, j)).epsilon(1e-13));
      CHECK(A(i, j) == A(j, i));
    }
  // positive definite
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("sigma_T permutation and duplicates") {
  const std::vector<double> q{0.25, 0.5, 0.75}, p{0.75, 0.25, 0.5};
  const GevParams t(-0.4, 0, 1);
  const auto A = sigma_T(t, q), B = sigma_T(t, p);
  const int perm[3] = {2, 0, 1};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(B(i, j) == doctest::Approx(A(perm[i], perm[j])).epsilon(1e-14));
  CHECK_THROWS_AS(sigma_T(t, std::vector<double>{0.3, 0.3}), DomainError);
}

TEST_CASE("cross_cov_K block relations") {
  const GevParams t(0.2, 0, 1);
  const PercentileTriple a(0.1, 0.5, 0.9), b(0.2, 0.6, 0.8);
  const Eigen::Matrix3d Kaa = cross_cov_K(t, a, a);
  const Eigen::Matrix3d S = sigma_T(t, std::vector<double>{0.1, 0.5, 0.9});
  CHECK((Kaa - S).cwiseAbs().maxCoeff() < 1e-14 * S.cwiseAbs().maxCoeff());
  const Eigen::Matrix3d Kab = cross_cov_K(t, a, b), Kba = cross_cov_K(t, b, a);
  CHECK((Kab - Kba.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * Kab.cwiseAbs().maxCoeff());
}

TEST_CASE("Monte Carlo covariance of empirical quantiles across two triples" * doctest::timeout(600)) {
  // Joint covariance of sqrt(N) (T_hat - T) over the six percentiles.
  const GevParams t(0.2, 0, 1);
  const PercentileTriple a(0.1, 0.5, 0.9), b(0.2, 0.6, 0.8);
  const std::size_t N = 20000, K = 2000;
  const std::vector<double> qs{0.1, 0.5, 0.9, 0.2, 0.6, 0.8};
  Eigen::MatrixXd X(K, 6);
  std::vector<double> buf(N);
  for (std::size_t k = 0; k < K; ++k) {
    Rng rng(stream_seed(42, 0, k));
    sample_into(t, buf, rng);
    const SortedSample s(buf);
    for (int j = 0; j < 6; ++j)
      X(static_cast<Eigen::Index>(k), j) = std::sqrt(double(N)) * (s.quantile(qs[std::size_t(j)]) - quantile(t, qs[std::size_t(j)]));
  }
  const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd cov = C.transpose() * C / double(K - 1);
  const Eigen::Matrix3d Kab = cross_cov_K(t, a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // MC standard error of a covariance estimate ~ sqrt((s_ii s_jj + s_ij^2)/K)
      const double se = std::sqrt((cov(i, i) * cov(3 + j, 3 + j) + cov(i, 3 + j) * cov(i, 3 + j)) / double(K));
      CHECK(std::fabs(cov(i, 3 + j) - Kab(i, j)) < std::max(0.05 * std::fabs(Kab(i, j)), 4 * se));
    }
}
