#pragma once

// Test-only oracle for the half-integer Matern closed forms. Evaluates the
// kernel through the modified Bessel function route of its definition,
//   k(r) = 2^{1-nu}/Gamma(nu) z^nu K_nu(z),
// with K_nu computed independently of any closed form:
//   - truncated ascending series K_nu = pi/2 (I_{-nu} - I_nu)/sin(pi nu)
//     in long double (accurate for z <= 16; the difference cancels ~e^z,
//     so the series alone cannot reach 1e-10 absolute beyond that), and
//   - trapezoid quadrature of K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt
//     for large z (double-exponential integrand, near machine accuracy).
// The two regimes overlap on z in [10, 16] and are cross-checked there.

#include <cmath>
#include <stdexcept>

namespace kbandit::testing {

inline long double bessel_i_series(long double order, long double z) {
  const long double half = z / 2.0L;
  long double term = std::pow(half, order) / std::tgamma(order + 1.0L);
  long double sum = term;
  const long double h2 = half * half;
  for (int k = 0; k < 600; ++k) {
    term *= h2 / ((k + 1.0L) * (k + 1.0L + order));
    sum += term;
    if (std::abs(term) < 1e-26L * std::abs(sum)) return sum;
  }
  throw std::runtime_error("bessel_i_series did not converge");
}

inline long double bessel_k_series(long double nu, long double z) {
  // sin(pi nu) = +-1 at half-integer orders
  const int p = static_cast<int>(std::lround(static_cast<double>(nu - 0.5L)));
  const long double sign = (p % 2 == 0) ? 1.0L : -1.0L;
  const long double pi = 3.14159265358979323846264338327950288L;
  return pi / 2.0L * (bessel_i_series(-nu, z) - bessel_i_series(nu, z)) / sign;
}

inline long double bessel_k_integral(long double nu, long double z) {
  const long double h = 5e-4L;
  long double sum = 0.5L;  // t = 0 endpoint: integrand = 1
  for (long long j = 1;; ++j) {
    const long double t = h * j;
    const long double expo = -z * std::cosh(t);
    if (expo < -800.0L) break;
    sum += std::exp(expo + std::log(std::cosh(nu * t)) + z);  // scaled by e^z
    if (j > 200000) throw std::runtime_error("bessel_k_integral range overflow");
  }
  return sum * h * std::exp(-z);
}

inline double matern_oracle(double nu, double z) {
  if (z == 0.0) return 1.0;
  const long double nl = nu;
  const long double zl = z;
  const long double k = (z <= 14.0) ? bessel_k_series(nl, zl) : bessel_k_integral(nl, zl);
  const long double val =
      std::pow(2.0L, 1.0L - nl) / std::tgamma(nl) * std::pow(zl, nl) * k;
  return static_cast<double>(val);
}

}  // namespace kbandit::testing
