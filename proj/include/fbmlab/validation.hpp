// Numerical checks of the local variance/correlation expansions behind the
// tail formulas, and Monte Carlo estimates of the drawdown/drawup tails for
// comparison with the asymptotics.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbmlab/asymptotics.hpp"
#include "fbmlab/constants.hpp"
#include "fbmlab/fbm.hpp"
#include "fbmlab/model.hpp"
#include "fbmlab/path_stats.hpp"

namespace fbmlab {

// ---------------------------------------------------------------------------
// Monte Carlo tails

struct ProportionInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for `hits` successes out of `n` (95% by default).
ProportionInterval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

struct McEstimate {
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t hits = 0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::optional<double> extrapolated;

  [[nodiscard]] double std_error() const;
};

McEstimate make_estimate(std::size_t hits, std::size_t n_paths, std::size_t n_steps);

struct SimulationOptions {
  unsigned threads = 0;
  SamplerKind sampler = SamplerKind::automatic;
};

/// Per-path grid maxima of the drawdown and drawup of X on a fine grid of
/// 2*n_steps intervals and on its every-other-point subgrid of n_steps
/// intervals. Path i is reproducible from (seed, i) alone.
struct FunctionalSamples {
  ModelParams params;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;  ///< coarse level; the fine level has 2 * n_steps
  std::uint64_t seed = 0;
  std::string sampler;
  std::vector<double> drawdown_coarse;
  std::vector<double> drawdown_fine;
  std::vector<double> drawup_coarse;
  std::vector<double> drawup_fine;

  [[nodiscard]] const std::vector<double>& coarse(Functional f) const {
    return f == Functional::drawdown ? drawdown_coarse : drawup_coarse;
  }
  [[nodiscard]] const std::vector<double>& fine(Functional f) const {
    return f == Functional::drawdown ? drawdown_fine : drawup_fine;
  }
};

FunctionalSamples simulate_functionals(const ModelParams& params, std::size_t n_paths,
                                       std::size_t n_steps, std::uint64_t seed,
                                       const SimulationOptions& options = {});

struct McTailResult {
  TailQuery query;
  McEstimate coarse;  ///< n_steps
  McEstimate fine;    ///< 2 * n_steps
  /// fine + (fine - coarse) / (2^H - 1), clipped to [0,1]. Assumes the grid
  /// bias of the discrete supremum scales like dt^H: a heuristic.
  double extrapolated = 0.0;
  std::string bias_note;
};

McTailResult tail_from_samples(const FunctionalSamples& samples, Functional functional, double u);

/// Frequency of exceeds() at n_steps and 2*n_steps over n_paths paths.
McTailResult mc_tail(const TailQuery& query, std::size_t n_paths, std::size_t n_steps,
                     std::uint64_t seed, const SimulationOptions& options = {});

// ---------------------------------------------------------------------------
// MC versus asymptotics

struct ConvergenceRow {
  double u = 0.0;
  McTailResult mc;
  AsymptoticResult asym;
  double ratio = 0.0;  ///< fine-grid p_hat / asymptotic probability
  double ratio_low = 0.0;
  double ratio_high = 0.0;
  double ratio_se = 0.0;
};

struct TrendStatistic {
  std::size_t steps = 0;
  /// Steps where |ratio - 1| did not grow by more than 3 pooled standard errors.
  std::size_t steps_toward_one = 0;
  /// Steps where the ratio did not drop by more than 3 pooled standard errors.
  std::size_t steps_nondecreasing = 0;
  bool monotone_toward_one = false;
};

struct ConvergenceTable {
  Functional functional = Functional::drawdown;
  ModelParams params;
  std::optional<DrawupVariant> variant;
  std::vector<ConvergenceRow> rows;
  std::optional<TrendStatistic> trend;  ///< absent for single-row ladders
};

struct ConvergenceBudget {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 1024;
  std::uint64_t seed = 1;
  SimulationOptions simulation;
  DrawupVariant variant = DrawupVariant::proof_derived;
};

ConvergenceTable convergence_study(Functional functional, const ModelParams& params,
                                   const std::vector<double>& u_ladder,
                                   const ConvergenceBudget& budget, ConstantsProvider& constants);

/// Same, reusing already simulated paths (common random numbers across u).
ConvergenceTable convergence_study(const FunctionalSamples& samples, Functional functional,
                                   const std::vector<double>& u_ladder,
                                   ConstantsProvider& constants,
                                   DrawupVariant variant = DrawupVariant::proof_derived);

TrendStatistic trend_statistic(const std::vector<ConvergenceRow>& rows);

// ---------------------------------------------------------------------------
// Local expansions

/// |t-s|^H / (u + mu(t-s) - (t^{2H} - s^{2H})/2): drawdown standard deviation scale.
double sigma_u_minus(double s, double t, double u, const ModelParams& params);
/// |t-s|^H / (u - mu(t-s) + (t^{2H} - s^{2H})/2): drawup standard deviation scale.
double sigma_u_plus(double s, double t, double u, const ModelParams& params);

/// 1 - Corr(B_H(t) - B_H(s), B_H(t') - B_H(s')) from the covariance kernel.
double increment_decorrelation(double s, double t, double s2, double t2, double hurst);

enum class LemmaId { lemma1, lemma2i, lemma2ii, lemma3 };
std::string_view to_string(LemmaId id);

struct LemmaCheckReport {
  LemmaId lemma = LemmaId::lemma1;
  ModelParams params;
  std::string ladder_kind;          ///< "u" or "delta"
  std::vector<double> u_grid;       ///< u per entry (empty for lemma3)
  std::vector<double> deltas;       ///< box size per entry
  std::vector<double> max_rel_error;
  std::optional<double> s_u;        ///< centre for lemma2ii at the last u
  bool strictly_decreasing = false;
  /// Each step shrinks the error by at least 0.625 per decade of the ladder.
  bool halving = false;
  bool pass = false;
};

/// sup over a 50x50 grid of [0,delta] x [T-delta,T] minus (0,T) of
/// |(1 - sigma^-(s,t)/sigma^-(0,T)) / (H(T-t)/T + Hs/T + s^{2H}/(2u)) - 1|.
double lemma1_error(const ModelParams& params, double u, double delta);

/// H >= 1/2: ratio against H(T-t)/T + Hs/T around (0,T).
/// H <  1/2: ratio against H(T-t)/T + H(1-H)(s - s_u)^2/(2T^2) on
///           [0, s_u + delta] x [T-delta, T] around (s_u, T).
double lemma2_error(const ModelParams& params, double u, double delta);

/// sup over quadruples in [0,delta] x [T-delta,T] of
/// |(1 - Corr) / ((|s-s'|^{2H} + |t-t'|^{2H}) / (2 T^{2H})) - 1|.
double lemma3_error(double hurst, double horizon, double delta);

LemmaCheckReport check_lemma1(const ModelParams& params, double u, double delta);
LemmaCheckReport check_lemma2(const ModelParams& params, double u, double delta);
LemmaCheckReport check_lemma3(double hurst, double horizon, double delta);

/// Ladder versions with delta = T / sqrt(u).
LemmaCheckReport check_lemma1(const ModelParams& params, const std::vector<double>& u_ladder);
LemmaCheckReport check_lemma2(const ModelParams& params, const std::vector<double>& u_ladder);
LemmaCheckReport check_lemma3(double hurst, double horizon, const std::vector<double>& deltas);

/// The u ladder {1e2, 1e3, 1e4} and delta ladder {1e-2, 1e-3, 1e-4} (times T).
std::vector<double> default_lemma_u_ladder();
std::vector<double> default_lemma_delta_ladder();

}  // namespace fbmlab
