#include "gevmq/multi_quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gevmq/errors.hpp"
#include "gevmq/three_quantile.hpp"

namespace gevmq {

TripleSet::TripleSet(std::vector<PercentileTriple> t) : triples(std::move(t)) {
  if (triples.empty()) throw DomainError("triple set must not be empty");
  std::vector<PercentileTriple> sorted = triples;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("triple set contains a repeated triple");
}

std::vector<double> TripleSet::distinct_percentiles() const {
  std::vector<double> p;
  p.reserve(3 * triples.size());
  for (const auto& t : triples) p.insert(p.end(), {t.q1, t.q2, t.q3});
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

double LambdaMatrix::rcond() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  return hi > 0 ? std::max(ev.minCoeff(), 0.0) / hi : 0.0;
}

namespace {

double kernel(double a, double b) { return std::min(a, b) - a * b; }

std::size_t index_of(const std::vector<double>& p, double q) {
  return static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), q) - p.begin());
}

}  // namespace

LambdaMatrix lambda_matrix(const TripleSet& M, const GevParams& theta, bool with_factor) {
  const auto m = static_cast<Eigen::Index>(M.size());
  // g(s, i) = W_s,i / f(T(q_i)); Lambda(s,t) = sum_ij g(s,i) g(t,j) C(q_i, q_j).
  Eigen::MatrixXd g(m, 3);
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto& q = M.triples[static_cast<std::size_t>(s)];
    const Eigen::RowVector3d W = grad_W(q, theta);
    for (int i = 0; i < 3; ++i) g(s, i) = W(i) * inverse_density_at(theta, q[i]);
  }
  LambdaMatrix L;
  L.xi_at = theta.xi;
  L.values.resize(m, m);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto& qs = M.triples[static_cast<std::size_t>(s)];
    for (Eigen::Index t = 0; t <= s; ++t) {
      const auto& qt = M.triples[static_cast<std::size_t>(t)];
      double acc = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc += g(s, i) * g(t, j) * kernel(qs[i], qt[j]);
      L.values(s, t) = acc;
      L.values(t, s) = acc;
    }
  }
  if (with_factor) {
    const std::vector<double> p = M.distinct_percentiles();
    const auto k = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd C(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        C(i, j) = kernel(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    Eigen::MatrixXd GA = Eigen::MatrixXd::Zero(k, m);  // (A D)^T
    for (Eigen::Index s = 0; s < m; ++s) {
      const auto& q = M.triples[static_cast<std::size_t>(s)];
      for (int i = 0; i < 3; ++i) GA(static_cast<Eigen::Index>(index_of(p, q[i])), s) = g(s, i);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    L.sqrt_factor = llt.matrixU() * GA;  // values = GA^T C GA = B^T B
  }
  return L;
}

LambdaMatrix lambda_matrix(const TripleSet& M, double xi, bool with_factor) {
  return lambda_matrix(M, GevParams(xi, 0.0, 1.0), with_factor);
}

LambdaMatrix lambda_matrix_serial(const TripleSet& M, const GevParams& theta) {
  const auto m = static_cast<Eigen::Index>(M.size());
  std::vector<Eigen::RowVector3d> W;
  for (const auto& q : M.triples) W.push_back(grad_W(q, theta));
  LambdaMatrix L;
  L.xi_at = theta.xi;
  L.values.resize(m, m);
  for (Eigen::Index s = 0; s < m; ++s)
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto us = static_cast<std::size_t>(s), ut = static_cast<std::size_t>(t);
      L.values(s, t) = W[us] * cross_cov_K(theta, M.triples[us], M.triples[ut]) * W[ut].transpose();
    }
  return L;
}

namespace {

// Weights from an eigen-decomposition Lambda = V diag(lam) V^T, keeping lam > cutoff.
WeightSolution weights_from_eigen(const Eigen::MatrixXd& V, const Eigen::VectorXd& lam, double cutoff) {
  const Eigen::Index m = V.rows();
  const Eigen::VectorXd y = V.transpose() * Eigen::VectorXd::Ones(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  double c = 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (!(lam(i) > cutoff)) continue;
    c += y(i) * y(i) / lam(i);
    u += V.col(i) * (y(i) / lam(i));
    ++rank;
  }
  if (!(c > 0.0) || !std::isfinite(c))
    throw RobustnessError("Lambda has no usable direction along the constant vector; re-select the triple set");
  WeightSolution ws;
  ws.w = u / c;
  ws.w /= ws.w.sum();
  ws.tau2 = 1.0 / c;
  ws.rank = rank;
  ws.has_negative = (ws.w.array() < 0.0).any();
  return ws;
}

}  // namespace

WeightSolution optimal_weights(const LambdaMatrix& L, double rel_cutoff) {
  if (L.values.size() == 0 || !L.values.allFinite())
    throw RobustnessError("Lambda is empty or not finite; re-select the triple set");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.values);
  if (es.info() != Eigen::Success) throw RobustnessError("eigen-decomposition of Lambda failed");
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  return weights_from_eigen(es.eigenvectors(), es.eigenvalues(), rel_cutoff * top);
}

WeightSolution optimal_weights_exact(const LambdaMatrix& L, double rel_cutoff) {
  if (L.sqrt_factor.size() == 0) throw DomainError("Lambda carries no square-root factor");
  if (!L.sqrt_factor.allFinite()) throw RobustnessError("Lambda factor is not finite");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(L.sqrt_factor, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const Eigen::MatrixXd& V = svd.matrixV();
  const double cut = rel_cutoff * (sv.size() ? sv(0) : 0.0);
  Eigen::VectorXd lam(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) lam(i) = sv(i) > cut ? sv(i) * sv(i) : 0.0;
  return weights_from_eigen(V, lam, 0.0);
}

TripleSet select_random_triples_on_grid(std::size_t m, std::size_t r, Rng& rng) {
  if (m < 1) throw DomainError("need at least one triple");
  const std::size_t p = r >= 1 ? r - 1 : 0;  // grid points 1/r .. (r-1)/r
  const double total = p < 3 ? 0.0 : static_cast<double>(p) * (p - 1) * (p - 2) / 6.0;
  if (static_cast<double>(m) > total)
    throw DomainError("m = " + std::to_string(m) + " exceeds the number of available triples on E(" +
                      std::to_string(r) + ")");
  auto make = [r](std::size_t i, std::size_t j, std::size_t k) {
    const double rr = static_cast<double>(r);
    return PercentileTriple(static_cast<double>(i) / rr, static_cast<double>(j) / rr, static_cast<double>(k) / rr);
  };
  std::vector<PercentileTriple> out;
  out.reserve(m);
  if (total <= 4.0e6) {
    std::vector<std::array<std::uint16_t, 3>> all;
    all.reserve(static_cast<std::size_t>(total));
    for (std::size_t i = 1; i <= p; ++i)
      for (std::size_t j = i + 1; j <= p; ++j)
        for (std::size_t k = j + 1; k <= p; ++k)
          all.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j), static_cast<std::uint16_t>(k)});
    for (std::size_t n = 0; n < m; ++n) {
      const std::size_t pick = n + static_cast<std::size_t>(rng.below(all.size() - n));
      std::swap(all[n], all[pick]);
      out.push_back(make(all[n][0], all[n][1], all[n][2]));
    }
  } else {
    std::set<std::array<std::size_t, 3>> seen;
    while (out.size() < m) {
      std::array<std::size_t, 3> c{};
      for (auto& v : c) v = 1 + static_cast<std::size_t>(rng.below(p));
      std::sort(c.begin(), c.end());
      if (c[0] == c[1] || c[1] == c[2] || !seen.insert(c).second) continue;
      out.push_back(make(c[0], c[1], c[2]));
    }
  }
  return TripleSet(std::move(out));
}

TripleSet select_random_triples(std::size_t m, Rng& rng) {
  return select_random_triples_on_grid(m, m + 2, rng);
}

bool is_robust(const TripleSet& M, double xi) {
  try {
    const LambdaMatrix L = lambda_matrix(M, xi, true);
    if (!L.values.allFinite() || !L.sqrt_factor.allFinite()) return false;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L.sqrt_factor, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > 0.0)) return false;
    const Eigen::VectorXd z = Eigen::VectorXd::Ones(L.size());
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(z.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kExactFactorCutoff * sv(0)) proj += svd.matrixV().col(i) * svd.matrixV().col(i).dot(z);
    return (z - proj).norm() <= 1e-6 * z.norm();
  } catch (const std::exception&) {
    return false;
  }
}

TripleSet select_robust_triples(std::size_t m, double xi, Rng& rng, int max_tries) {
  for (int i = 0; i < max_tries; ++i) {
    TripleSet M = select_random_triples(m, rng);
    if (is_robust(M, xi)) return M;
  }
  throw RobustnessError("no robust triple set found after " + std::to_string(max_tries) + " draws");
}

double tau2_opt_exact(const TripleSet& M, double xi) {
  return optimal_weights_exact(lambda_matrix(M, xi, true)).tau2;
}

std::size_t mq_min_sample(std::size_t m) { return 10 * (m + 2); }

MqXiResult estimate_xi_iterative(const TripleSet& M, const SortedSample& data, const MqOptions& opt) {
  if (M.size() == 0) throw DomainError("triple set must not be empty");
  if (data.size() < mq_min_sample(M.size()))
    throw DomainError("sample size " + std::to_string(data.size()) + " below the minimum " +
                      std::to_string(mq_min_sample(M.size())) + " for m = " + std::to_string(M.size()));
  if (opt.iters < 0) throw DomainError("iteration count must be non-negative");

  const std::vector<double> p = M.distinct_percentiles();
  std::vector<double> That(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) That[i] = data.quantile(p[i]);

  MqXiResult r;
  std::vector<PercentileTriple> kept;
  for (std::size_t s = 0; s < M.size(); ++s) {
    const auto& q = M.triples[s];
    const Triple3 T{That[index_of(p, q.q1)], That[index_of(p, q.q2)], That[index_of(p, q.q3)]};
    if (!(T[0] < T[1] && T[1] < T[2])) {
      r.dropped.push_back(s);
      continue;
    }
    double eta = 0.0;
    try {
      eta = solve_xi(q, T);
    } catch (const std::exception&) {
      r.dropped.push_back(s);
      continue;
    }
    if (!std::isfinite(eta)) {
      r.dropped.push_back(s);
      continue;
    }
    kept.push_back(q);
    r.eta.push_back(eta);
  }
  if (kept.empty()) throw EstimationError("every triple failed: empirical quantiles not strictly increasing");
  r.used = TripleSet(std::move(kept));

  const auto m = static_cast<Eigen::Index>(r.eta.size());
  const Eigen::Map<const Eigen::VectorXd> eta(r.eta.data(), m);
  double x = eta.mean();
  r.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  r.tau2 = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < opt.iters; ++k) {
    const LambdaMatrix L = lambda_matrix(r.used, GevParams(x, 0.0, 1.0));
    const WeightSolution ws = optimal_weights(L, opt.eig_cutoff);
    x = ws.w.dot(eta);
    if (!std::isfinite(x)) throw RobustnessError("MQ iterate is not finite; re-select the triple set");
    r.weights = ws.w;
    r.tau2 = ws.tau2;
  }
  r.xi_hat = x;
  r.negative_weights = (r.weights.array() < 0.0).any();
  return r;
}

MqXiResult estimate_xi_iterative(const TripleSet& M, std::span<const double> data, const MqOptions& opt) {
  return estimate_xi_iterative(M, SortedSample(data), opt);
}

MqFit estimate_theta_mq(const TripleSet& M, const SortedSample& data, const MqOptions& opt) {
  MqXiResult xr = estimate_xi_iterative(M, data, opt);
  const std::vector<double> p = xr.used.distinct_percentiles();
  // Least squares of T_hat_j = mu + sigma Q_j(xi_hat).
  const auto k = static_cast<double>(p.size());
  double sq = 0, st = 0, sqq = 0, sqt = 0;
  for (double q : p) {
    const double Q = shape_q(xr.xi_hat, loglog(q));
    const double T = data.quantile(q);
    sq += Q;
    st += T;
    sqq += Q * Q;
    sqt += Q * T;
  }
  const double den = k * sqq - sq * sq;
  const double sigma = (k * sqt - sq * st) / den;
  const double mu = (st - sigma * sq) / k;
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
    throw EstimationError("MQ scale estimate is not positive");
  return MqFit{GevParams(xr.xi_hat, mu, sigma), std::move(xr)};
}

MqFit estimate_theta_mq(const TripleSet& M, std::span<const double> data, const MqOptions& opt) {
  return estimate_theta_mq(M, SortedSample(data), opt);
}

std::vector<Tau2Point> tau2_opt_curve(double xi, std::span<const std::size_t> m_values, Rng& rng) {
  if (!std::is_sorted(m_values.begin(), m_values.end())) throw DomainError("m values must be ascending");
  std::vector<Tau2Point> out;
  for (std::size_t m : m_values) out.push_back({m, tau2_opt_exact(select_robust_triples(m, xi, rng), xi)});
  return out;
}

std::vector<Tau2Point> tau2_opt_nested(double xi, std::span<const std::size_t> m_values, Rng& rng) {
  if (m_values.empty()) return {};
  if (!std::is_sorted(m_values.begin(), m_values.end())) throw DomainError("m values must be ascending");
  const std::size_t mmax = m_values.back();
  const TripleSet all = select_random_triples_on_grid(mmax, mmax + 2, rng);
  std::vector<Tau2Point> out;
  for (std::size_t m : m_values) {
    TripleSet sub(std::vector<PercentileTriple>(all.triples.begin(), all.triples.begin() + static_cast<std::ptrdiff_t>(m)));
    out.push_back({m, tau2_opt_exact(sub, xi)});
  }
  return out;
}

}  // namespace gevmq
