#pragma once

#include <cmath>
#include <complex>

namespace collapse::numerics {

using cdouble = std::complex<double>;

/// (1 - e^{-z}) / z for z >= 0, with the z -> 0 limit 1.
inline double one_minus_exp_over(double z) {
  if (z == 0.0) return 1.0;
  if (std::abs(z) < 1e-5) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return -std::expm1(-z) / z;
}

/// e^z - 1 for complex z without cancellation near 0.
inline cdouble expm1(cdouble z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  const double re = std::expm1(x) * std::cos(y) - 2.0 * s * s;
  const double im = std::exp(x) * std::sin(y);
  return {re, im};
}

/// Sum of sum_{n>=n0} coef(n) u^n / n!, for small u (|u| < ~1). `coef` gets n.
template <class Coef>
double exp_series(double u, int n0, Coef coef) {
  double term = 1.0;  // u^n / n!
  for (int n = 1; n <= n0; ++n) term *= u / n;
  double sum = 0.0;
  for (int n = n0; n < n0 + 80; ++n) {
    const double add = coef(n) * term;
    sum += add;
    if (n > n0 + 3 && std::abs(add) <= 1e-18 * std::abs(sum)) break;
    term *= u / (n + 1);
  }
  return sum;
}

inline double ipow(double base, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

}  // namespace collapse::numerics
