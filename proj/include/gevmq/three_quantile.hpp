#pragma once

#include <array>

#include <Eigen/Dense>

#include "gevmq/gev.hpp"
#include "gevmq/triple.hpp"

namespace gevmq {

using Triple3 = std::array<double, 3>;

// Shape of the inversion problem for one percentile triple and quantile triple.
struct TripleGeometry {
  double LL1, LL2, LL3;
  double a1, a2;  // LL1-LL3 > LL2-LL3 > 0
  double b;       // (T3-T2)/(T3-T1)
  double c;       // 1 - b = (T2-T1)/(T3-T1), kept separately to avoid cancellation
  double s;       // stationary point of h
};

// Requires T strictly increasing (DomainError otherwise).
TripleGeometry triple_geometry(const PercentileTriple& q, const Triple3& T);

// h(x) = exp(-x a2) - b exp(-x a1) - c, with c = 1 - b. For x < 0 the value is multiplied
// by exp(x a1) so that it stays O(1); roots and signs are unchanged.
double h_scaled(const TripleGeometry& g, double x);
double h_scaled_derivative(const TripleGeometry& g, double x);

// Nonzero root of h, or 0 in the degenerate double-root case.
double solve_xi(const PercentileTriple& q, const Triple3& T);

// Full inversion. Throws EstimationError when T_hat is not strictly increasing.
GevParams estimate_theta(const PercentileTriple& q, const Triple3& T_hat);

// Q_j(xi) and dQ_j/dxi at the triple.
Eigen::RowVector3d q_vector(const PercentileTriple& q, double xi);
Eigen::RowVector3d dxi_q_vector(const PercentileTriple& q, double xi);

// Gradient of the xi estimator with respect to the quantile vector.
Eigen::RowVector3d grad_W(const PercentileTriple& q, const GevParams& theta);

// sigma = S(T,Q), mu = L(T,Q), and their partial gradients.
double scale_S(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q);
double location_L(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q);
struct SlGradients {
  Eigen::RowVector3d dT_S, dQ_S, dT_L, dQ_L;
};
SlGradients sl_gradients(const Eigen::RowVector3d& T, const Eigen::RowVector3d& Q);

double avar_xi(const PercentileTriple& q, const GevParams& theta);

struct ThreeQuantileAvar {
  double avar_xi;
  double avar_sigma;
  double avar_mu;
  Eigen::Matrix3d gamma;  // full covariance, order (xi, mu, sigma)
};
ThreeQuantileAvar avar_sigma_mu(const PercentileTriple& q, const GevParams& theta);

}  // namespace gevmq
