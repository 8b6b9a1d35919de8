#pragma once

#include <cmath>

namespace gevmq::detail {

// phi(x) = (1 - exp(-x)) / x, phi(0) = 1.
inline double phi(double x) {
  if (x == 0.0) return 1.0;
  return -std::expm1(-x) / x;
}

// phi'(x) = ((1 + x) exp(-x) - 1) / x^2, by Taylor series near 0.
inline double dphi(double x) {
  if (std::fabs(x) < 0.1) {
    double sum = 0.0, pw = 1.0, fact = 2.0;  // pw = x^(k-1), fact = (k+1)!
    for (int k = 1; k <= 14; ++k) {
      sum += ((k & 1) ? -1.0 : 1.0) * k * pw / fact;
      pw *= x;
      fact *= (k + 2);
    }
    return sum;
  }
  return ((1.0 + x) * std::exp(-x) - 1.0) / (x * x);
}

}  // namespace gevmq::detail
