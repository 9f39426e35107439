#include "fbmlab/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fbmlab/model.hpp"

namespace fbmlab {

double psi(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_psi(double x) {
  if (x < 30.0) return std::log(psi(x));
  // Asymptotic expansion of the Mills ratio; at x >= 30 the omitted terms are
  // below double precision.
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double series = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2;
    series += term;
  }
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double gamma_prefactor(double hurst) {
  validate_hurst(hurst);
  return std::tgamma(1.0 / (2.0 * hurst) + 1.0);
}

double quad_quarter_integral(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("quad_quarter_integral needs T > 0");
  }
  const double a = std::pow(horizon, 0.25);
  auto integrand = [a](double y) { return 2.0 * y * std::exp(-y * y - a * y); };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-14, &error);
  return value;
}

double piterbarg_half(double nu) {
  if (!(nu > 0.0)) throw DomainError("Piterbarg constant needs nu > 0");
  return 1.0 + 1.0 / nu;
}

}  // namespace fbmlab
