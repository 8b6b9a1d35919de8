#pragma once

#include <array>
#include <compare>

namespace gevmq {

// Percentiles 0 < q1 < q2 < q3 < 1.
struct PercentileTriple {
  double q1 = 0.0, q2 = 0.0, q3 = 0.0;

  PercentileTriple() = default;
  // Throws DomainError unless strictly increasing inside (0,1).
  PercentileTriple(double a, double b, double c);

  std::array<double, 3> as_array() const { return {q1, q2, q3}; }
  double operator[](int i) const { return i == 0 ? q1 : (i == 1 ? q2 : q3); }
  auto operator<=>(const PercentileTriple&) const = default;
};

}  // namespace gevmq
