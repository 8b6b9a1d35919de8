#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gevmq/rng.hpp"
#include "gevmq/triple.hpp"

namespace gevmq {

// Fisher information per observation at (xi, 0, 1), parameter order (xi, mu, sigma).
struct FisherMatrix {
  Eigen::Matrix3d J;
  double xi_at = 0.0;
};

// Requires xi > -0.5 and |xi| > 1e-3.
FisherMatrix fisher_info(double xi);
// Cramer-Rao bound for xi. Interpolated for |xi| < 0.02.
double crb_xi(double xi);

// Default number of Gauss nodes per dimension for the PWM integral.
inline constexpr int kPwmNodes = 100;

// Covariance of the limiting (X0, X1, X2) of the PWM statistics. Requires xi < 0.5.
Eigen::Matrix3d pwm_x_covariance(double xi, int nodes = kPwmNodes);
Eigen::Matrix3d pwm_x_covariance_serial(double xi, int nodes = kPwmNodes);
double pwm_avar(double xi, int nodes = kPwmNodes);

// Asymptotic variance of sqrt(k)(xi_hat - xi) for the moment tail estimator.
double deh_avar(double xi);

struct OptimalTriplet {
  PercentileTriple q;
  double avar_star = 0.0;
  std::optional<double> crb;
  std::optional<double> efficiency;
};

// Grid search over {0.005, 0.005+step, ..., 0.995} then simplex refinement
// inside the same box. Requires xi in [-5, 5].
OptimalTriplet optimal_triplet(double xi, double step = 0.01);
OptimalTriplet optimal_triplet_serial(double xi, double step = 0.01);

struct Table2Row {
  double xi = 0.0;
  double mq = 0.0;
  std::optional<double> mle;
  std::optional<double> pwm;
};

// Theoretical standard errors at sample size n, MQ on a robust random set of m triples.
Table2Row table2_row(double xi, std::size_t n, std::size_t m, Rng& rng);

}  // namespace gevmq
