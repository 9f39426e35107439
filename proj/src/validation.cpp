#include "fbmlab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fbmlab {

std::string_view to_string(LemmaId id) {
  switch (id) {
    case LemmaId::lemma1: return "lemma1";
    case LemmaId::lemma2i: return "lemma2i";
    case LemmaId::lemma2ii: return "lemma2ii";
    case LemmaId::lemma3: return "lemma3";
  }
  return "unknown";
}

namespace {

constexpr int kGrid = 50;

// Denominators of sigma_u^-(s,t) and sigma_u^+(s,t).
double denom_minus(double s, double t, double u, const ModelParams& p) {
  return u + p.drift * (t - s) - 0.5 * (std::pow(t, 2.0 * p.hurst) - std::pow(s, 2.0 * p.hurst));
}

double denom_plus(double s, double t, double u, const ModelParams& p) {
  return u - p.drift * (t - s) + 0.5 * (std::pow(t, 2.0 * p.hurst) - std::pow(s, 2.0 * p.hurst));
}

// 1 - sigma(s, T - r) / sigma(s0, T), evaluated in log space so that small
// values keep their relative accuracy. `denom` is one of the two above.
template <class Denom>
double one_minus_sigma_ratio(double s, double r, double s0, double u, const ModelParams& p,
                             Denom denom) {
  const double T = p.horizon;
  const double t = T - r;
  const double len0 = T - s0;
  const double d0 = denom(s0, T, u, p);
  const double d = denom(s, t, u, p);
  const double log_ratio =
      p.hurst * std::log1p((s0 - s - r) / len0) - std::log1p((d - d0) / d0);
  return -std::expm1(log_ratio);
}

void check_lemma_inputs(const ModelParams& params, double u, double delta) {
  params.validate();
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("lemma check needs u > 0");
  if (!(delta > 0.0) || !(delta <= 0.5 * params.horizon)) {
    throw DomainError("lemma check needs 0 < delta <= T/2");
  }
}

double grid_point(double lo, double hi, int k) {
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(kGrid - 1);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (!(v[k + 1] < v[k])) return false;
  }
  return true;
}

// Each step shrinks by at least 0.625 per decade of the ladder.
bool halves_per_decade(const std::vector<double>& err, const std::vector<double>& ladder,
                       bool ladder_grows) {
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double decades = ladder_grows ? std::log10(ladder[k + 1] / ladder[k])
                                        : std::log10(ladder[k] / ladder[k + 1]);
    if (!(err[k + 1] <= err[k] * std::pow(0.625, decades))) return false;
  }
  return true;
}

void finalize(LemmaCheckReport& report, const std::vector<double>& ladder, bool ladder_grows) {
  const bool finite = std::all_of(report.max_rel_error.begin(), report.max_rel_error.end(),
                                  [](double e) { return std::isfinite(e) && e >= 0.0; });
  report.strictly_decreasing = finite && strictly_decreasing(report.max_rel_error);
  report.halving = finite && halves_per_decade(report.max_rel_error, ladder, ladder_grows);
  report.pass = report.strictly_decreasing && report.halving;
}

bool is_rough(double hurst) { return drawup_regime(hurst) == Regime::DU_H_lt_half; }

}  // namespace

double sigma_u_minus(double s, double t, double u, const ModelParams& params) {
  return std::pow(std::abs(t - s), params.hurst) / denom_minus(s, t, u, params);
}

double sigma_u_plus(double s, double t, double u, const ModelParams& params) {
  return std::pow(std::abs(t - s), params.hurst) / denom_plus(s, t, u, params);
}

double increment_decorrelation(double s, double t, double s2, double t2, double hurst) {
  validate_hurst(hurst);
  const double h2 = 2.0 * hurst;
  auto pw = [h2](double x) { return std::pow(std::abs(x), h2); };
  const double sd1 = std::pow(std::abs(t - s), hurst);
  const double sd2 = std::pow(std::abs(t2 - s2), hurst);
  if (sd1 == 0.0 || sd2 == 0.0) throw DomainError("increment over an empty interval");
  // Var of the difference of the two increments, written through the
  // (small) cross term so that 1 - Corr keeps its relative accuracy.
  const double cross = 0.5 * (pw(t - s2) + pw(t2 - s) - pw(t - s) - pw(t2 - s2));
  const double var_diff = pw(t - t2) + pw(s - s2) - 2.0 * cross;
  return (var_diff - (sd1 - sd2) * (sd1 - sd2)) / (2.0 * sd1 * sd2);
}

double lemma1_error(const ModelParams& params, double u, double delta) {
  check_lemma_inputs(params, u, delta);
  const double H = params.hurst;
  const double T = params.horizon;
  double worst = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double s = grid_point(0.0, delta, i);
    for (int j = 0; j < kGrid; ++j) {
      const double r = grid_point(0.0, delta, j);  // T - t
      if (i == 0 && j == 0) continue;
      const double lhs = one_minus_sigma_ratio(s, r, 0.0, u, params, denom_minus);
      const double target = H * r / T + H * s / T + std::pow(s, 2.0 * H) / (2.0 * u);
      worst = std::max(worst, std::abs(lhs / target - 1.0));
    }
  }
  return worst;
}

double lemma2_error(const ModelParams& params, double u, double delta) {
  check_lemma_inputs(params, u, delta);
  const double H = params.hurst;
  const double T = params.horizon;
  double worst = 0.0;
  if (!is_rough(H)) {
    for (int i = 0; i < kGrid; ++i) {
      const double s = grid_point(0.0, delta, i);
      for (int j = 0; j < kGrid; ++j) {
        const double r = grid_point(0.0, delta, j);
        if (i == 0 && j == 0) continue;
        const double lhs = one_minus_sigma_ratio(s, r, 0.0, u, params, denom_plus);
        const double target = H * r / T + H * s / T;
        worst = std::max(worst, std::abs(lhs / target - 1.0));
      }
    }
    return worst;
  }
  const double s_u = solve_s_u(u, params);
  const double s_hi = std::min(s_u + delta, 0.5 * T);
  for (int i = 0; i < kGrid; ++i) {
    const double s = grid_point(0.0, s_hi, i);
    for (int j = 0; j < kGrid; ++j) {
      const double r = grid_point(0.0, delta, j);
      const double target = H * r / T + H * (1.0 - H) * (s - s_u) * (s - s_u) / (2.0 * T * T);
      if (target == 0.0) continue;
      const double lhs = one_minus_sigma_ratio(s, r, s_u, u, params, denom_plus);
      worst = std::max(worst, std::abs(lhs / target - 1.0));
    }
  }
  return worst;
}

double lemma3_error(double hurst, double horizon, double delta) {
  validate_hurst(hurst);
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (!(delta > 0.0) || !(delta <= 1e-2 * horizon)) {
    throw DomainError("lemma 3 check needs 0 < delta <= T/100");
  }
  constexpr int n = 11;
  std::vector<double> s_pts(n), t_pts(n);
  for (int k = 0; k < n; ++k) {
    s_pts[k] = delta * k / (n - 1);
    t_pts[k] = horizon - delta * k / (n - 1);
  }
  const double scale = 2.0 * std::pow(horizon, 2.0 * hurst);
  double worst = 0.0;
  for (int a = 0; a < n * n; ++a) {
    const double s = s_pts[a / n];
    const double t = t_pts[a % n];
    for (int b = a + 1; b < n * n; ++b) {
      const double s2 = s_pts[b / n];
      const double t2 = t_pts[b % n];
      const double lhs = increment_decorrelation(s, t, s2, t2, hurst);
      const double target =
          (std::pow(std::abs(s - s2), 2.0 * hurst) + std::pow(std::abs(t - t2), 2.0 * hurst)) /
          scale;
      worst = std::max(worst, std::abs(lhs / target - 1.0));
    }
  }
  return worst;
}

namespace {

LemmaCheckReport point_report(LemmaId id, const ModelParams& params, double u, double delta,
                              double error) {
  LemmaCheckReport r;
  r.lemma = id;
  r.params = params;
  r.ladder_kind = "u";
  r.u_grid = {u};
  r.deltas = {delta};
  r.max_rel_error = {error};
  finalize(r, r.u_grid, true);
  return r;
}

template <class ErrorFn>
LemmaCheckReport u_ladder_report(LemmaId id, const ModelParams& params,
                                 const std::vector<double>& u_ladder, ErrorFn error) {
  if (u_ladder.empty()) throw DomainError("u ladder is empty");
  LemmaCheckReport r;
  r.lemma = id;
  r.params = params;
  r.ladder_kind = "u";
  for (double u : u_ladder) {
    const double delta = params.horizon / std::sqrt(u);
    r.u_grid.push_back(u);
    r.deltas.push_back(delta);
    r.max_rel_error.push_back(error(params, u, delta));
  }
  finalize(r, r.u_grid, true);
  return r;
}

}  // namespace

LemmaCheckReport check_lemma1(const ModelParams& params, double u, double delta) {
  return point_report(LemmaId::lemma1, params, u, delta, lemma1_error(params, u, delta));
}

LemmaCheckReport check_lemma2(const ModelParams& params, double u, double delta) {
  const LemmaId id = is_rough(params.hurst) ? LemmaId::lemma2ii : LemmaId::lemma2i;
  LemmaCheckReport r = point_report(id, params, u, delta, lemma2_error(params, u, delta));
  if (id == LemmaId::lemma2ii) r.s_u = solve_s_u(u, params);
  return r;
}

LemmaCheckReport check_lemma3(double hurst, double horizon, double delta) {
  LemmaCheckReport r;
  r.lemma = LemmaId::lemma3;
  r.params.hurst = hurst;
  r.params.horizon = horizon;
  r.ladder_kind = "delta";
  r.deltas = {delta};
  r.max_rel_error = {lemma3_error(hurst, horizon, delta)};
  finalize(r, r.deltas, false);
  return r;
}

LemmaCheckReport check_lemma1(const ModelParams& params, const std::vector<double>& u_ladder) {
  return u_ladder_report(LemmaId::lemma1, params, u_ladder, lemma1_error);
}

LemmaCheckReport check_lemma2(const ModelParams& params, const std::vector<double>& u_ladder) {
  const LemmaId id = is_rough(params.hurst) ? LemmaId::lemma2ii : LemmaId::lemma2i;
  LemmaCheckReport r = u_ladder_report(id, params, u_ladder, lemma2_error);
  if (id == LemmaId::lemma2ii) r.s_u = solve_s_u(u_ladder.back(), params);
  return r;
}

LemmaCheckReport check_lemma3(double hurst, double horizon, const std::vector<double>& deltas) {
  if (deltas.empty()) throw DomainError("delta ladder is empty");
  LemmaCheckReport r;
  r.lemma = LemmaId::lemma3;
  r.params.hurst = hurst;
  r.params.horizon = horizon;
  r.ladder_kind = "delta";
  for (double d : deltas) {
    r.deltas.push_back(d * horizon);
    r.max_rel_error.push_back(lemma3_error(hurst, horizon, d * horizon));
  }
  finalize(r, r.deltas, false);
  return r;
}

std::vector<double> default_lemma_u_ladder() { return {1e2, 1e3, 1e4}; }
std::vector<double> default_lemma_delta_ladder() { return {1e-2, 1e-3, 1e-4}; }

}  // namespace fbmlab
