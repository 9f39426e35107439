// Scalar special functions used by the tail formulas.
#pragma once

namespace fbmlab {

/// Standard normal upper tail P(N > x) = erfc(x / sqrt 2) / 2.
/// Underflows to 0 for x beyond ~38.
double psi(double x);

/// log P(N > x); finite for every finite x (asymptotic series for large x).
double log_psi(double x);

/// Gamma(1/(2H) + 1).
double gamma_prefactor(double hurst);

/// int_0^inf exp(-x - T^{1/4} sqrt(x)) dx, evaluated as
/// int_0^inf 2y exp(-y^2 - T^{1/4} y) dy by adaptive Gauss-Kronrod.
double quad_quarter_integral(double horizon);

/// Piterbarg constant for H = 1/2: 1 + 1/nu.
double piterbarg_half(double nu);

}  // namespace fbmlab
