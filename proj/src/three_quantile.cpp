#include "gevmq/three_quantile.hpp"

#include <cmath>
#include <string>

#include "gevmq/detail/series.hpp"
#include "gevmq/errors.hpp"
#include "gevmq/quantile_stats.hpp"

namespace gevmq {

using detail::dphi;
using detail::phi;

TripleGeometry triple_geometry(const PercentileTriple& q, const Triple3& T) {
  if (!(T[0] < T[1] && T[1] < T[2]))
    throw DomainError("quantile triple must be strictly increasing");
  TripleGeometry g{};
  g.LL1 = loglog(q.q1);
  g.LL2 = loglog(q.q2);
  g.LL3 = loglog(q.q3);
  g.a1 = g.LL1 - g.LL3;
  g.a2 = g.LL2 - g.LL3;
  g.b = (T[2] - T[1]) / (T[2] - T[0]);
  g.c = (T[1] - T[0]) / (T[2] - T[0]);
  g.s = std::log(g.a1 * g.b / g.a2) / (g.a1 - g.a2);
  return g;
}

double h_scaled(const TripleGeometry& g, double x) {
  if (x >= 0.0) return std::exp(-x * g.a2) - g.b * std::exp(-x * g.a1) - g.c;
  return std::exp(x * (g.a1 - g.a2)) - g.b - g.c * std::exp(x * g.a1);
}

double h_scaled_derivative(const TripleGeometry& g, double x) {
  if (x >= 0.0) return -g.a2 * std::exp(-x * g.a2) + g.b * g.a1 * std::exp(-x * g.a1);
  return (g.a1 - g.a2) * std::exp(x * (g.a1 - g.a2)) - g.c * g.a1 * std::exp(x * g.a1);
}

namespace {

// Root of h_scaled inside [lo, hi] with h(lo) > 0 > h(hi) (or the reverse).
double newton_bisect(const TripleGeometry& g, double lo, double hi) {
  double flo = h_scaled(g, lo);
  if (flo < 0) std::swap(lo, hi);  // orient so that h(lo) > 0
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = h_scaled(g, x);
    if (f == 0.0) return x;
    if (f > 0) lo = x; else hi = x;
    const double df = h_scaled_derivative(g, x);
    double next = (df != 0.0) ? x - f / df : 0.5 * (lo + hi);
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    if (!(next > a && next < b)) next = 0.5 * (lo + hi);
    const double step = std::fabs(next - x);
    x = next;
    if (step <= 1e-15 * (1.0 + std::fabs(x)) || b - a <= 1e-14 * (1.0 + std::fabs(x))) break;
  }
  return x;
}

}  // namespace

double solve_xi(const PercentileTriple& q, const Triple3& T) {
  const TripleGeometry g = triple_geometry(q, T);
  const double slope0 = g.a1 * g.b - g.a2;  // h'(0)
  if (std::fabs(slope0) < 1e-12 * g.a1) return 0.0;

  const double s = g.s;
  // The outer side is where h(+inf) = b - 1 < 0, or the scaled h(-inf) = -b < 0.
  const double dir = slope0 > 0 ? 1.0 : -1.0;
  if (!(h_scaled(g, s) > 0.0)) return 2.0 * s;  // roots at 0 and ~2s merge numerically
  double inner = s;
  double step = std::max(1.0, std::fabs(s));
  double outer = s + dir * step;
  int grow = 0;
  while (h_scaled(g, outer) > 0.0) {
    inner = outer;
    step *= 2.0;
    outer = s + dir * step;
    if (++grow > 60) throw EstimationError("root bracket expansion failed");
  }
  return newton_bisect(g, inner, outer);
}

Eigen::RowVector3d q_vector(const PercentileTriple& q, double xi) {
  return {shape_q(xi, loglog(q.q1)), shape_q(xi, loglog(q.q2)), shape_q(xi, loglog(q.q3))};
}

Eigen::RowVector3d dxi_q_vector(const PercentileTriple& q, double xi) {
  Eigen::RowVector3d d;
  for (int j = 0; j < 3; ++j) {
    const double L = loglog(q[j]);
    d(j) = -L * L * dphi(xi * L);
  }
  return d;
}

double scale_S(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q) {
  return (T(1) - T(0)) / (Q(1) - Q(0));
}

double location_L(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q) {
  return (T(0) * Q(1) - Q(0) * T(1)) / (Q(1) - Q(0));
}

SlGradients sl_gradients(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q) {
  const double dq = Q(1) - Q(0);
  const double dq2 = dq * dq;
  SlGradients g;
  g.dT_S = Eigen::RowVector3d(-1.0, 1.0, 0.0) / dq;
  g.dQ_S = Eigen::RowVector3d(1.0, -1.0, 0.0) * ((T(1) - T(0)) / dq2);
  g.dT_L = Eigen::RowVector3d(Q(1), -Q(0), 0.0) / dq;
  g.dQ_L = Eigen::RowVector3d(Q(1), -Q(0), 0.0) * ((T(0) - T(1)) / dq2);
  return g;
}

GevParams estimate_theta(const PercentileTriple& q, const Triple3& T_hat) {
  if (!(T_hat[0] < T_hat[1] && T_hat[1] < T_hat[2]))
    throw EstimationError("empirical quantile triple is not strictly increasing");
  const double xi = solve_xi(q, T_hat);
  const Eigen::RowVector3d Q = q_vector(q, xi);
  const Eigen::RowVector3d T(T_hat[0], T_hat[1], T_hat[2]);
  const double sigma = scale_S(T, Q);
  const double mu = location_L(T, Q);
  if (!std::isfinite(xi) || !std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma))
    throw EstimationError("three-quantile inversion produced a non-finite estimate");
  return GevParams(xi, mu, sigma);
}

Eigen::RowVector3d grad_W(const PercentileTriple& q, const GevParams& theta) {
  const double T1 = quantile(theta, q.q1), T2 = quantile(theta, q.q2), T3 = quantile(theta, q.q3);
  const double L1 = loglog(q.q1), L2 = loglog(q.q2), L3 = loglog(q.q3);
  const double a1 = L1 - L3, a2 = L2 - L3;
  // xi solves b(T) = beta(xi) with beta = a2 phi(xi a2) / (a1 phi(xi a1)),
  // so W = V / beta'(xi); this form has no 0/0 at xi = 0.
  const double x = theta.xi;
  const double p1 = phi(x * a1), p2 = phi(x * a2);
  const double dbeta = (a2 / a1) * (a2 * dphi(x * a2) * p1 - a1 * p2 * dphi(x * a1)) / (p1 * p1);
  const double d = T3 - T1;
  const Eigen::RowVector3d V(T3 - T2, T1 - T3, T2 - T1);
  return V / (d * d * dbeta);
}

double avar_xi(const PercentileTriple& q, const GevParams& theta) {
  const Eigen::RowVector3d W = grad_W(q, theta);
  return W.dot(sigma_T(theta, q) * W.transpose());
}

ThreeQuantileAvar avar_sigma_mu(const PercentileTriple& q, const GevParams& theta) {
  const Eigen::RowVector3d W = grad_W(q, theta);
  const Eigen::Matrix3d St = sigma_T(theta, q);
  const double av = W.dot(St * W.transpose());
  const Eigen::RowVector3d T(quantile(theta, q.q1), quantile(theta, q.q2), quantile(theta, q.q3));
  const Eigen::RowVector3d Q = q_vector(q, theta.xi);
  const Eigen::RowVector3d dQ = dxi_q_vector(q, theta.xi);
  const SlGradients g = sl_gradients(T, Q);

  const Eigen::Matrix3d SQ = av * dQ.transpose() * dQ;
  const Eigen::Matrix3d A = (W * St).transpose() * dQ;  // A(i,j) = (W St)_i dQ_j

  ThreeQuantileAvar r{};
  r.avar_xi = av;
  auto form = [](const Eigen::RowVector3d& a, const Eigen::Matrix3d& M, const Eigen::RowVector3d& b) {
    return a.dot(M * b.transpose());
  };
  r.avar_sigma = form(g.dT_S, St, g.dT_S) + form(g.dQ_S, SQ, g.dQ_S) + 2.0 * form(g.dT_S, A, g.dQ_S);
  r.avar_mu = form(g.dT_L, St, g.dT_L) + form(g.dQ_L, SQ, g.dQ_L) + 2.0 * form(g.dT_L, A, g.dQ_L);

  Eigen::Matrix3d D;
  D.row(0) = W;
  D.row(1) = g.dT_L + g.dQ_L.dot(dQ) * W;
  D.row(2) = g.dT_S + g.dQ_S.dot(dQ) * W;
  r.gamma = D * St * D.transpose();
  return r;
}

}  // namespace gevmq
