#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace gevmq {

enum class Estimator { MQ, MLE, PWM, DEH };

std::string to_string(Estimator e);
// Case-insensitive; throws DomainError on unknown names.
Estimator estimator_from_string(std::string_view name);

struct FitResult {
  Estimator estimator = Estimator::MQ;
  double xi_hat = 0.0;
  std::optional<double> mu_hat;
  std::optional<double> sigma_hat;
  bool valid = false;
  std::optional<std::string> failure_reason;
};

struct MleOptions {
  int max_evals = 3000;
  // Newton steps on a finite-difference Hessian after the simplex stage.
  int polish_steps = 8;
};

// Maximum likelihood for (xi, mu, sigma). Needs at least 10 observations.
FitResult mle_fit(std::span<const double> data, const MleOptions& opt = {});

// (3^x - 1)/(2^x - 1), with the log3/log2 limit at 0.
double pwm_ratio(double x);
// Probability weighted moments estimate of xi. Needs at least 3 observations.
FitResult pwm_fit(std::span<const double> data);

enum class DehFormula {
  Printed,  // H1 + 2 H1^2/H2 - 1
  Moment,   // H1 + 1 - 1/(2 (1 - H1^2/H2))
};
// Moment-type tail estimator on the top k order statistics. 1 <= k < n.
FitResult deh_fit(std::span<const double> data, std::size_t k, DehFormula formula = DehFormula::Printed);

}  // namespace gevmq
