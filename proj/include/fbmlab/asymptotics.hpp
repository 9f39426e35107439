// Tail asymptotics of the maximum drawdown and drawup of X_t over [0,T] as
// the threshold u grows: threshold functions, regime dispatch on H, and the
// composed approximation prefactor * u^power * Psi(threshold).
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fbmlab/constants.hpp"
#include "fbmlab/model.hpp"
#include "fbmlab/path_stats.hpp"

namespace fbmlab {

/// Relative half-width of the band around H = 1/4 and H = 1/2 that selects the
/// boundary regime.
inline constexpr double kRegimeTolerance = 1e-12;

enum class Regime {
  DD_H_gt_half,
  DD_H_eq_half,
  DD_quarter_lt_H_lt_half,
  DD_H_eq_quarter,
  DD_H_lt_quarter,
  DU_H_gt_half,
  DU_H_eq_half,
  DU_H_lt_half,
};

std::string_view to_string(Regime regime);

/// Which constant multiplies the drawup tail for H < 1/2. `statement` carries
/// T^{3H}; `proof_derived` carries T^{3H-2}, the power obtained by expanding
/// (m2)^{-3} Delta_1^{-2}. Both use sqrt(pi / (H^3 (1-H))).
enum class DrawupVariant { statement, proof_derived };

std::string_view to_string(DrawupVariant variant);
DrawupVariant parse_drawup_variant(std::string_view name);

Regime drawdown_regime(double hurst);
Regime drawup_regime(double hurst);

struct ThresholdFunctions {
  std::optional<double> m;   ///< drawdown
  std::optional<double> m1;  ///< drawup, H >= 1/2
  std::optional<double> m2;  ///< drawup, H < 1/2
  std::optional<double> s_star;
  std::optional<double> s_u;
};

/// m(u) = (u + mu T - T^{2H}/2) / T^H. Throws PreconditionError when the
/// numerator is not positive.
double threshold_m(double u, const ModelParams& params);

/// m1(u) = (u - mu T + T^{2H}/2) / T^H.
double threshold_m1(double u, const ModelParams& params);

/// Objective whose infimum over s in [0,T) is m2(u):
/// (u - mu (T-s) + (T^{2H} - s^{2H})/2) / (T-s)^H.
double m2_objective(double s, double u, const ModelParams& params);

struct M2Result {
  double value = 0.0;
  double s_star = 0.0;
};

/// Global minimum of m2_objective over s in [0, T(1 - 1e-9)]: coarse scan,
/// golden-section refinement around the best cell, one Newton polish.
M2Result threshold_m2(double u, const ModelParams& params);

/// Stationary point s_u of s -> sigma_u^+(s,T) for H < 1/2, from the damped
/// fixed-point iteration
///   s = (u/T + T^{2H-1}/2 + mu(1-H)/H + s^{2H}/(2T) - mu(1-H)s/(TH))^{1/(2H-1)}
/// started at T^{1/(1-2H)} u^{-1/(1-2H)}.
double solve_s_u(double u, const ModelParams& params);

/// Right-hand side of the s_u fixed-point map.
double s_u_map(double s, double u, const ModelParams& params);

struct ConstantsUsed {
  std::optional<ConstantEstimate> pickands;
  std::optional<ConstantEstimate> piterbarg;
};

/// probability == prefactor * u^power_exponent * Psi(threshold_value).
struct AsymptoticResult {
  Functional functional = Functional::drawdown;
  Regime regime = Regime::DD_H_gt_half;
  double u = 0.0;
  ModelParams params;
  double threshold_value = 0.0;
  double prefactor = 1.0;
  double power_exponent = 0.0;
  double probability = 0.0;
  double log_probability = 0.0;
  ThresholdFunctions thresholds;
  ConstantsUsed constants_used;
  std::optional<DrawupVariant> variant;
  std::optional<std::string> variant_note;

  /// prefactor * u^power_exponent * Psi(threshold_value), evaluated afresh.
  [[nodiscard]] double recompose() const;
};

AsymptoticResult asym_drawdown(double u, const ModelParams& params, ConstantsProvider& constants);

AsymptoticResult asym_drawup(double u, const ModelParams& params, ConstantsProvider& constants,
                             DrawupVariant variant = DrawupVariant::proof_derived);

AsymptoticResult asym_tail(Functional functional, double u, const ModelParams& params,
                           ConstantsProvider& constants,
                           DrawupVariant variant = DrawupVariant::proof_derived);

/// Drawup constant C(H,T) multiplying (H_H)^2 u^{2/H-3} Psi(m2) for H < 1/2.
double drawup_rough_constant(double hurst, double horizon, DrawupVariant variant);

}  // namespace fbmlab
