#include "gevmq/asymptotics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gsl/gsl_integration.h>

#include "gevmq/detail/nelder_mead.hpp"
#include "gevmq/detail/series.hpp"
#include "gevmq/errors.hpp"
#include "gevmq/gev.hpp"
#include "gevmq/multi_quantile.hpp"
#include "gevmq/three_quantile.hpp"

namespace gevmq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

namespace {

// The information matrix is badly conditioned for large xi (condition number
// ~1e9 at xi = 5) and its entries cancel, so they are formed and inverted in
// 50-digit arithmetic.
using Wide = boost::multiprecision::cpp_bin_float_50;
using WideMatrix = Eigen::Matrix<Wide, 3, 3>;

WideMatrix fisher_wide(double xi_d) {
  if (!(xi_d > -0.5)) throw DomainError("CRB undefined for xi <= -0.5");
  if (std::fabs(xi_d) <= 1e-3)
    throw DomainError("Fisher matrix formula is singular near xi = 0; use crb_xi, which interpolates");
  const Wide xi = xi_d;
  const Wide one = 1;
  const Wide euler = boost::math::constants::euler<Wide>();
  const Wide pi = boost::math::constants::pi<Wide>();
  const Wide p = (1 + xi) * (1 + xi) * boost::math::tgamma(Wide(1 + 2 * xi));
  const Wide r = boost::math::tgamma(Wide(2 + xi));
  const Wide dgamma = boost::math::digamma(Wide(1 + xi)) * boost::math::tgamma(Wide(1 + xi));
  const Wide fq = (1 + xi) * dgamma + (1 + one / xi) * r;
  const Wide x2 = xi * xi;
  const Wide c = 1 - euler + one / xi;

  WideMatrix J;
  J(0, 0) = (pi * pi / 6 + c * c - 2 * fq / xi + p / x2) / x2;
  J(0, 1) = J(1, 0) = -(fq - p / xi) / xi;
  J(0, 2) = J(2, 0) = -(1 - euler - fq + (1 - r + p) / xi) / x2;
  J(1, 1) = p;
  J(1, 2) = J(2, 1) = -(p - r) / xi;
  J(2, 2) = (1 - 2 * r + p) / x2;
  return J;
}

double crb_direct(double xi) {
  const WideMatrix J = fisher_wide(xi);
  // (J^-1)_00 as the cofactor over the determinant.
  const Wide cof = J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
  const Wide det = J(0, 0) * cof - J(0, 1) * (J(1, 0) * J(2, 2) - J(1, 2) * J(2, 0)) +
                   J(0, 2) * (J(1, 0) * J(2, 1) - J(1, 1) * J(2, 0));
  return static_cast<double>(cof / det);
}

}  // namespace

FisherMatrix fisher_info(double xi) {
  const WideMatrix W = fisher_wide(xi);
  FisherMatrix f;
  f.xi_at = xi;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.J(i, j) = static_cast<double>(W(i, j));
  return f;
}

double crb_xi(double xi) {
  if (!(xi > -0.5)) throw DomainError("CRB undefined for xi <= -0.5");
  auto direct = [](double x) { return crb_direct(x); };
  if (std::fabs(xi) >= 0.02) return direct(xi);
  const std::array<double, 4> xs{-0.04, -0.02, 0.02, 0.04};
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < 4; ++j)
      if (j != i) w *= (xi - xs[j]) / (xs[i] - xs[j]);
    sum += w * direct(xs[i]);
  }
  return sum;
}

// ---------------------------------------------------------------- PWM

namespace {

struct Rule {
  std::vector<double> x, w;
};

Rule gsl_rule(const gsl_integration_fixed_type* type, int n, double a, double b, double alpha, double beta) {
  gsl_integration_fixed_workspace* ws = gsl_integration_fixed_alloc(type, static_cast<std::size_t>(n), a, b, alpha, beta);
  if (!ws) throw DomainError("quadrature rule allocation failed");
  Rule r;
  r.x.assign(gsl_integration_fixed_nodes(ws), gsl_integration_fixed_nodes(ws) + n);
  r.w.assign(gsl_integration_fixed_weights(ws), gsl_integration_fixed_weights(ws) + n);
  gsl_integration_fixed_free(ws);
  return r;
}

// After s = e^-x, u = e^-y and splitting along x = y v, every block of the
// covariance integral becomes
//   R(a, b) = int_0^1 v^-xi int_0^inf y^-2xi e^-y e^-(a + b v) y phi(y v) dy dv,
// and Cov(X_r, X_l) = (r+1)(l+1) (R(r, l) + R(l, r)).
// Returns the contribution of Jacobi node k to all nine R(a,b), a,b in {0,1,2}.
std::array<double, 9> pwm_node_terms(const Rule& lag, double v, double wv) {
  std::array<double, 9> acc{};
  for (std::size_t i = 0; i < lag.x.size(); ++i) {
    const double y = lag.x[i];
    const double base = lag.w[i] * detail::phi(y * v);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) acc[static_cast<std::size_t>(3 * a + b)] += base * std::exp(-(a + b * v) * y);
  }
  for (double& t : acc) t *= wv;
  return acc;
}

Eigen::Matrix3d assemble(const std::array<double, 9>& R) {
  Eigen::Matrix3d c;
  for (int r = 0; r < 3; ++r)
    for (int l = 0; l < 3; ++l)
      c(r, l) = (r + 1) * (l + 1) * (R[static_cast<std::size_t>(3 * r + l)] + R[static_cast<std::size_t>(3 * l + r)]);
  return c;
}

void check_pwm(double xi, int nodes) {
  if (!(xi < 0.5)) throw DomainError("PWM asymptotic variance requires xi < 0.5");
  if (nodes < 2) throw DomainError("need at least 2 quadrature nodes");
}

}  // namespace

Eigen::Matrix3d pwm_x_covariance(double xi, int nodes) {
  check_pwm(xi, nodes);
  const Rule lag = gsl_rule(gsl_integration_fixed_laguerre, nodes, 0.0, 1.0, -2.0 * xi, 0.0);
  const Rule jac = gsl_rule(gsl_integration_fixed_jacobi, nodes, 0.0, 1.0, 0.0, -xi);
  std::vector<std::array<double, 9>> parts(jac.x.size());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < jac.x.size(); ++k) parts[k] = pwm_node_terms(lag, jac.x[k], jac.w[k]);
  std::array<double, 9> R{};
  for (const auto& p : parts)
    for (std::size_t i = 0; i < 9; ++i) R[i] += p[i];
  return assemble(R);
}

Eigen::Matrix3d pwm_x_covariance_serial(double xi, int nodes) {
  check_pwm(xi, nodes);
  const Rule lag = gsl_rule(gsl_integration_fixed_laguerre, nodes, 0.0, 1.0, -2.0 * xi, 0.0);
  const Rule jac = gsl_rule(gsl_integration_fixed_jacobi, nodes, 0.0, 1.0, 0.0, -xi);
  std::array<double, 9> R{};
  for (std::size_t k = 0; k < jac.x.size(); ++k) {
    const auto p = pwm_node_terms(lag, jac.x[k], jac.w[k]);
    for (std::size_t i = 0; i < 9; ++i) R[i] += p[i];
  }
  return assemble(R);
}

double pwm_avar(double xi, int nodes) {
  const Eigen::Matrix3d C = pwm_x_covariance(xi, nodes);
  const double l2 = std::log(2.0), l3 = std::log(3.0);
  // xi/(k^xi - 1) = 1/(log k * phi(-xi log k))
  const double c2 = 1.0 / (l2 * detail::phi(-xi * l2));
  const double c3 = 1.0 / (l3 * detail::phi(-xi * l3));
  // log k/(1 - k^-xi) = 1/(xi phi(xi log k)); the difference has a finite limit at 0.
  double diff;
  if (std::fabs(xi) < 1e-6)
    diff = 0.5 * (l3 - l2) + xi * (l3 * l3 - l2 * l2) / 12.0;
  else
    diff = (1.0 / detail::phi(xi * l3) - 1.0 / detail::phi(xi * l2)) / xi;
  const double u = 1.0 / (std::tgamma(1.0 - xi) * diff);
  const Eigen::Vector3d a(c2 - c3, -c2, c3);
  return u * u * a.dot(C * a);
}

double deh_avar(double xi) {
  if (xi >= 0) return 1 + xi * xi;
  const double t = 1 - 2 * xi;
  return (1 - xi) * (1 - xi) * t *
         (4 - 8 * t / (1 - 3 * xi) + (5 - 11 * xi) * t / ((1 - 3 * xi) * (1 - 4 * xi)));
}

// ---------------------------------------------------------------- optimal triplet

namespace {

struct GridBest {
  double value = kInf;
  std::size_t i = 0, j = 0, k = 0;
};

bool better(const GridBest& a, const GridBest& b) {
  if (a.value != b.value) return a.value < b.value;
  return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
}

std::vector<double> triplet_grid(double step) {
  if (!(step > 0 && step <= 0.1)) throw DomainError("grid step must lie in (0, 0.1]");
  std::vector<double> g;
  for (int n = 0;; ++n) {
    const double q = 0.005 + n * step;
    if (q > 0.995 + 1e-12) break;
    g.push_back(std::min(q, 0.995));
  }
  return g;
}

GridBest scan_row(const std::vector<double>& g, std::size_t i, const GevParams& theta) {
  GridBest best;
  for (std::size_t j = i + 1; j < g.size(); ++j)
    for (std::size_t k = j + 1; k < g.size(); ++k) {
      const double v = avar_xi(PercentileTriple(g[i], g[j], g[k]), theta);
      const GridBest cand{std::isfinite(v) ? v : kInf, i, j, k};
      if (better(cand, best)) best = cand;
    }
  return best;
}

OptimalTriplet refine(double xi, const std::vector<double>& g, const GridBest& gb, double step) {
  const GevParams theta(xi, 0.0, 1.0);
  auto f = [&](const std::array<double, 3>& x) {
    if (!(x[0] >= 0.005 && x[0] < x[1] && x[1] < x[2] && x[2] <= 0.995)) return kInf;
    const double v = avar_xi(PercentileTriple(x[0], x[1], x[2]), theta);
    return std::isfinite(v) ? v : kInf;
  };
  const std::array<double, 3> x0{g[gb.i], g[gb.j], g[gb.k]};
  const std::array<double, 3> st{0.5 * step, 0.5 * step, 0.5 * step};
  auto r = detail::nelder_mead<3>(f, x0, st, 4000, 1e-14, 1e-9);
  OptimalTriplet out;
  if (r.fx < gb.value) {
    out.q = PercentileTriple(r.x[0], r.x[1], r.x[2]);
    out.avar_star = r.fx;
  } else {
    out.q = PercentileTriple(x0[0], x0[1], x0[2]);
    out.avar_star = gb.value;
  }
  if (xi > -0.5) {
    out.crb = crb_xi(xi);
    out.efficiency = *out.crb / out.avar_star;
  }
  return out;
}

void check_triplet_xi(double xi) {
  if (!(xi >= -5.0 && xi <= 5.0)) throw DomainError("optimal_triplet requires xi in [-5, 5]");
}

}  // namespace

OptimalTriplet optimal_triplet(double xi, double step) {
  check_triplet_xi(xi);
  const std::vector<double> g = triplet_grid(step);
  const GevParams theta(xi, 0.0, 1.0);
  std::vector<GridBest> rows(g.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < g.size(); ++i) rows[i] = scan_row(g, i, theta);
  GridBest best;
  for (const auto& r : rows)
    if (better(r, best)) best = r;
  return refine(xi, g, best, step);
}

OptimalTriplet optimal_triplet_serial(double xi, double step) {
  check_triplet_xi(xi);
  const std::vector<double> g = triplet_grid(step);
  const GevParams theta(xi, 0.0, 1.0);
  GridBest best;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const GridBest r = scan_row(g, i, theta);
    if (better(r, best)) best = r;
  }
  return refine(xi, g, best, step);
}

Table2Row table2_row(double xi, std::size_t n, std::size_t m, Rng& rng) {
  if (n == 0) throw DomainError("sample size must be positive");
  const double dn = static_cast<double>(n);
  Table2Row row;
  row.xi = xi;
  row.mq = std::sqrt(tau2_opt_exact(select_robust_triples(m, xi, rng), xi) / dn);
  if (xi > -0.5) row.mle = std::sqrt(crb_xi(xi) / dn);
  if (xi < 0.5) row.pwm = std::sqrt(pwm_avar(xi) / dn);
  return row;
}

}  // namespace gevmq
