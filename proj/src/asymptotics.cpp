#include "fbmlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fbmlab/special.hpp"

namespace fbmlab {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::DD_H_gt_half: return "DD_H_gt_half";
    case Regime::DD_H_eq_half: return "DD_H_eq_half";
    case Regime::DD_quarter_lt_H_lt_half: return "DD_quarter_lt_H_lt_half";
    case Regime::DD_H_eq_quarter: return "DD_H_eq_quarter";
    case Regime::DD_H_lt_quarter: return "DD_H_lt_quarter";
    case Regime::DU_H_gt_half: return "DU_H_gt_half";
    case Regime::DU_H_eq_half: return "DU_H_eq_half";
    case Regime::DU_H_lt_half: return "DU_H_lt_half";
  }
  return "unknown";
}

std::string_view to_string(DrawupVariant variant) {
  return variant == DrawupVariant::statement ? "statement" : "proof_derived";
}

DrawupVariant parse_drawup_variant(std::string_view name) {
  if (name == "statement") return DrawupVariant::statement;
  if (name == "proof_derived") return DrawupVariant::proof_derived;
  throw DomainError("variant must be 'statement' or 'proof_derived', got '" + std::string(name) +
                    "'");
}

namespace {

bool near_boundary(double hurst, double boundary) {
  return std::abs(hurst - boundary) < kRegimeTolerance * boundary;
}

void check_u(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("threshold u must be positive and finite");
}

double compose_probability(double prefactor, double u, double power, double threshold) {
  return prefactor * std::pow(u, power) * psi(threshold);
}

AsymptoticResult finish(AsymptoticResult r) {
  r.probability = compose_probability(r.prefactor, r.u, r.power_exponent, r.threshold_value);
  r.log_probability =
      std::log(r.prefactor) + r.power_exponent * std::log(r.u) + log_psi(r.threshold_value);
  if (!std::isfinite(r.probability) || r.probability < 0.0 || !(r.prefactor > 0.0)) {
    throw NumericalError("asymptotic probability is not finite and nonnegative");
  }
  if (r.recompose() != r.probability) {
    throw std::logic_error("asymptotic result does not recompose from its fields");
  }
  return r;
}

}  // namespace

double AsymptoticResult::recompose() const {
  return compose_probability(prefactor, u, power_exponent, threshold_value);
}

Regime drawdown_regime(double hurst) {
  validate_hurst(hurst);
  if (near_boundary(hurst, 0.5)) return Regime::DD_H_eq_half;
  if (near_boundary(hurst, 0.25)) return Regime::DD_H_eq_quarter;
  if (hurst > 0.5) return Regime::DD_H_gt_half;
  if (hurst > 0.25) return Regime::DD_quarter_lt_H_lt_half;
  return Regime::DD_H_lt_quarter;
}

Regime drawup_regime(double hurst) {
  validate_hurst(hurst);
  if (near_boundary(hurst, 0.5)) return Regime::DU_H_eq_half;
  if (hurst > 0.5) return Regime::DU_H_gt_half;
  return Regime::DU_H_lt_half;
}

double threshold_m(double u, const ModelParams& params) {
  params.validate();
  check_u(u);
  const double T = params.horizon;
  const double H = params.hurst;
  const double numerator = u + params.drift * T - 0.5 * std::pow(T, 2.0 * H);
  if (!(numerator > 0.0)) {
    std::ostringstream os;
    os << "threshold too small for asymptotic regime: u + mu*T - T^{2H}/2 = " << numerator
       << " <= 0 (u=" << u << ", " << describe(params) << ")";
    throw PreconditionError(os.str());
  }
  return numerator / std::pow(T, H);
}

double threshold_m1(double u, const ModelParams& params) {
  params.validate();
  check_u(u);
  const double T = params.horizon;
  const double H = params.hurst;
  const double numerator = u - params.drift * T + 0.5 * std::pow(T, 2.0 * H);
  if (!(numerator > 0.0)) {
    std::ostringstream os;
    os << "threshold too small for asymptotic regime: u - mu*T + T^{2H}/2 = " << numerator
       << " <= 0 (u=" << u << ", " << describe(params) << ")";
    throw PreconditionError(os.str());
  }
  return numerator / std::pow(T, H);
}

double m2_objective(double s, double u, const ModelParams& params) {
  const double T = params.horizon;
  const double H = params.hurst;
  const double numerator =
      u - params.drift * (T - s) + 0.5 * (std::pow(T, 2.0 * H) - std::pow(s, 2.0 * H));
  return numerator / std::pow(T - s, H);
}

namespace {

// d/ds of m2_objective.
double m2_derivative(double s, double u, const ModelParams& params) {
  const double T = params.horizon;
  const double H = params.hurst;
  const double numerator =
      u - params.drift * (T - s) + 0.5 * (std::pow(T, 2.0 * H) - std::pow(s, 2.0 * H));
  const double dnum = params.drift - H * std::pow(s, 2.0 * H - 1.0);
  return dnum / std::pow(T - s, H) + H * numerator / std::pow(T - s, H + 1.0);
}

}  // namespace

M2Result threshold_m2(double u, const ModelParams& params) {
  params.validate();
  check_u(u);
  const double T = params.horizon;
  const double H = params.hurst;
  const double s_max = T * (1.0 - 1e-9);

  // Candidate cells: log-spaced near 0 (where the minimiser sits for large u),
  // linear over the rest, plus the asymptotic guess.
  std::vector<double> grid{0.0, s_max};
  for (int k = 0; k <= 480; ++k) grid.push_back(s_max * std::pow(10.0, -16.0 + k / 30.0));
  for (int k = 1; k < 512; ++k) grid.push_back(s_max * k / 512.0);
  if (H < 0.5) {
    grid.push_back(std::clamp(std::pow(T, 1.0 / (1.0 - 2.0 * H)) *
                                  std::pow(u, -1.0 / (1.0 - 2.0 * H)),
                              0.0, s_max));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const double numerator =
        u - params.drift * (T - s) + 0.5 * (std::pow(T, 2.0 * H) - std::pow(s, 2.0 * H));
    if (!(numerator > 0.0)) {
      std::ostringstream os;
      os << "threshold too small for asymptotic regime: m2 numerator " << numerator
         << " <= 0 at s=" << s << " (u=" << u << ", " << describe(params) << ")";
      throw PreconditionError(os.str());
    }
    const double v = m2_objective(s, u, params);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (!std::isfinite(best_value)) {
    throw NumericalError("m2 minimisation: objective is not finite on the scan grid");
  }

  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double tol = 1e-12 * T;
  auto f = [&](double s) { return m2_objective(s, u, params); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  M2Result result{best_value, grid[best]};
  const double mid = 0.5 * (lo + hi);
  if (const double fm = f(mid); fm < result.value) result = {fm, mid};
  if (grid[best] == 0.0 && f(0.0) <= result.value) result = {f(0.0), 0.0};

  // One Newton step on the derivative, kept only if it improves the value.
  const double s0 = result.s_star;
  if (s0 > 0.0 && s0 < s_max) {
    const double h = std::max(1e-7 * s0, 1e-15 * T);
    const double d1 = m2_derivative(s0, u, params);
    const double d2 =
        (m2_derivative(s0 + h, u, params) - m2_derivative(std::max(s0 - h, 0.0), u, params)) /
        (s0 + h - std::max(s0 - h, 0.0));
    if (d2 > 0.0) {
      const double s1 = s0 - d1 / d2;
      if (s1 > 0.0 && s1 < s_max) {
        if (const double v1 = f(s1); v1 < result.value) result = {v1, s1};
      }
    }
  }
  return result;
}

double s_u_map(double s, double u, const ModelParams& params) {
  const double T = params.horizon;
  const double H = params.hurst;
  const double mu = params.drift;
  const double inner = u / T + 0.5 * std::pow(T, 2.0 * H - 1.0) + mu * (1.0 - H) / H +
                       std::pow(s, 2.0 * H) / (2.0 * T) - mu * (1.0 - H) * s / (T * H);
  if (!(inner > 0.0)) {
    std::ostringstream os;
    os << "threshold too small for asymptotic regime: s_u map base " << inner << " <= 0";
    throw PreconditionError(os.str());
  }
  return std::pow(inner, 1.0 / (2.0 * H - 1.0));
}

double solve_s_u(double u, const ModelParams& params) {
  params.validate();
  check_u(u);
  const double H = params.hurst;
  const double T = params.horizon;
  if (!(H < 0.5) || near_boundary(H, 0.5)) {
    throw DomainError("s_u is defined for H < 1/2 only");
  }
  const double exponent = 1.0 / (1.0 - 2.0 * H);
  double s = std::pow(T, exponent) * std::pow(u, -exponent);
  double damping = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double next = (1.0 - damping) * s + damping * s_u_map(s, u, params);
    if (!std::isfinite(next) || next <= 0.0) {
      damping *= 0.5;
      continue;
    }
    const double change = std::abs(next - s);
    s = next;
    if (change <= 1e-12 * s) {
      if (!(s > 0.0 && s < T)) {
        std::ostringstream os;
        os << "s_u = " << s << " lies outside (0, T); u too small";
        throw PreconditionError(os.str());
      }
      return s;
    }
  }
  std::ostringstream os;
  os << "s_u fixed-point iteration did not converge in 200 steps (u=" << u << ", "
     << describe(params) << ")";
  throw NumericalError(os.str());
}

double drawup_rough_constant(double hurst, double horizon, DrawupVariant variant) {
  const double H = hurst;
  const double base = std::pow(2.0, -1.0 / H - 0.5) *
                      std::sqrt(std::numbers::pi / (H * H * H * (1.0 - H)));
  const double t_power = variant == DrawupVariant::statement ? 3.0 * H : 3.0 * H - 2.0;
  return base * std::pow(horizon, t_power);
}

AsymptoticResult asym_drawdown(double u, const ModelParams& params, ConstantsProvider& constants) {
  AsymptoticResult r;
  r.functional = Functional::drawdown;
  r.u = u;
  r.params = params;
  r.threshold_value = threshold_m(u, params);
  r.thresholds.m = r.threshold_value;
  r.regime = drawdown_regime(params.hurst);

  const double H = params.hurst;
  const double T = params.horizon;
  switch (r.regime) {
    case Regime::DD_H_gt_half:
      r.prefactor = 1.0;
      break;
    case Regime::DD_H_eq_half: {
      ConstantEstimate p = constants.piterbarg(0.5, 1.0);
      r.prefactor = p.value * p.value;
      r.constants_used.piterbarg = std::move(p);
      break;
    }
    case Regime::DD_quarter_lt_H_lt_half: {
      ConstantEstimate c = constants.pickands(H);
      const double inner = std::pow(2.0, -1.0 / (2.0 * H)) * std::pow(T, 2.0 * H - 1.0) * c.value / H;
      r.prefactor = inner * inner;
      r.power_exponent = 2.0 / H - 4.0;
      r.constants_used.pickands = std::move(c);
      break;
    }
    case Regime::DD_H_eq_quarter: {
      ConstantEstimate c = constants.pickands(H);
      r.prefactor = c.value * c.value / T * quad_quarter_integral(T);
      r.power_exponent = 4.0;
      r.constants_used.pickands = std::move(c);
      break;
    }
    case Regime::DD_H_lt_quarter: {
      ConstantEstimate c = constants.pickands(H);
      r.prefactor = std::pow(2.0, -1.0 / (2.0 * H)) * std::pow(T, 2.0 * H - 2.0) *
                    gamma_prefactor(H) * c.value * c.value / H;
      r.power_exponent = 3.0 / (2.0 * H) - 2.0;
      r.constants_used.pickands = std::move(c);
      break;
    }
    default:
      throw std::logic_error("drawup regime in drawdown dispatch");
  }
  return finish(std::move(r));
}

AsymptoticResult asym_drawup(double u, const ModelParams& params, ConstantsProvider& constants,
                             DrawupVariant variant) {
  AsymptoticResult r;
  r.functional = Functional::drawup;
  r.u = u;
  r.params = params;
  r.regime = drawup_regime(params.hurst);

  const double H = params.hurst;
  const double T = params.horizon;
  switch (r.regime) {
    case Regime::DU_H_gt_half:
      r.threshold_value = threshold_m1(u, params);
      r.thresholds.m1 = r.threshold_value;
      r.prefactor = 1.0;
      break;
    case Regime::DU_H_eq_half: {
      r.threshold_value = threshold_m1(u, params);
      r.thresholds.m1 = r.threshold_value;
      ConstantEstimate p = constants.piterbarg(0.5, 1.0);
      r.prefactor = p.value * p.value;
      r.constants_used.piterbarg = std::move(p);
      break;
    }
    case Regime::DU_H_lt_half: {
      const M2Result m2 = threshold_m2(u, params);
      r.threshold_value = m2.value;
      r.thresholds.m2 = m2.value;
      r.thresholds.s_star = m2.s_star;
      try {
        r.thresholds.s_u = solve_s_u(u, params);
      } catch (const std::exception&) {
        // s_u is informational here; m2 already located the minimiser.
      }
      ConstantEstimate c = constants.pickands(H);
      r.prefactor = drawup_rough_constant(H, T, variant) * c.value * c.value;
      r.power_exponent = 2.0 / H - 3.0;
      r.constants_used.pickands = std::move(c);
      r.variant = variant;
      r.variant_note =
          variant == DrawupVariant::proof_derived
              ? "proof_derived: C = 2^{-1/H-1/2} T^{3H-2} sqrt(pi/(H^3(1-H))), from "
                "(m2)^{-3} (Delta_1)^{-2} with Delta_1 = 2^{1/(2H)} T m2^{-1/H}; the statement "
                "variant carries T^{3H} instead (ratio T^2)"
              : "statement: C = 2^{-1/H-1/2} T^{3H} sqrt(pi/(H^3(1-H))), with 1-H in place of "
                "the negative H-1 under the root; ratio T^2 to proof_derived";
      break;
    }
    default:
      throw std::logic_error("drawdown regime in drawup dispatch");
  }
  return finish(std::move(r));
}

AsymptoticResult asym_tail(Functional functional, double u, const ModelParams& params,
                           ConstantsProvider& constants, DrawupVariant variant) {
  return functional == Functional::drawdown ? asym_drawdown(u, params, constants)
                                            : asym_drawup(u, params, constants, variant);
}

}  // namespace fbmlab
