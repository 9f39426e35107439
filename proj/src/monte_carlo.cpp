#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fbmlab/parallel.hpp"
#include "fbmlab/rng.hpp"
#include "fbmlab/validation.hpp"

namespace fbmlab {

ProportionInterval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  ProportionInterval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Keep p_hat inside the interval despite rounding at the extremes.
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

double McEstimate::std_error() const {
  if (n_paths == 0) return 0.0;
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_paths));
}

McEstimate make_estimate(std::size_t hits, std::size_t n_paths, std::size_t n_steps) {
  McEstimate e;
  e.hits = hits;
  e.n_paths = n_paths;
  e.n_steps = n_steps;
  e.p_hat = n_paths == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n_paths);
  const ProportionInterval ci = wilson_interval(hits, n_paths);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

namespace {

struct Maxima {
  double dd_fine = 0.0;
  double du_fine = 0.0;
  double dd_coarse = 0.0;
  double du_coarse = 0.0;
};

// One pass over X = B + trend on the fine grid, tracking both functionals on
// the fine grid and on its even-index subgrid.
Maxima scan(const std::vector<double>& raw, const std::vector<double>& trend) {
  Maxima m;
  double peak_f = 0.0, trough_f = 0.0, peak_c = 0.0, trough_c = 0.0;
  const std::size_t n = raw.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double x = raw[k] + trend[k];
    peak_f = std::max(peak_f, x);
    trough_f = std::min(trough_f, x);
    m.dd_fine = std::max(m.dd_fine, peak_f - x);
    m.du_fine = std::max(m.du_fine, x - trough_f);
    if ((k & 1U) == 0) {
      peak_c = std::max(peak_c, x);
      trough_c = std::min(trough_c, x);
      m.dd_coarse = std::max(m.dd_coarse, peak_c - x);
      m.du_coarse = std::max(m.du_coarse, x - trough_c);
    }
  }
  return m;
}

std::size_t count_above(const std::vector<double>& values, double u) {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [u](double v) { return v > u; }));
}

}  // namespace

FunctionalSamples simulate_functionals(const ModelParams& params, std::size_t n_paths,
                                       std::size_t n_steps, std::uint64_t seed,
                                       const SimulationOptions& options) {
  params.validate();
  if (n_paths == 0) throw DomainError("need at least one path");
  if (n_steps == 0) throw DomainError("need at least one step");
  const GridSpec fine{2 * n_steps, params.horizon};
  const std::unique_ptr<PathSampler> sampler =
      make_sampler(fine, params.hurst, options.sampler);
  const std::vector<double> trend = trend_values(fine, params);

  FunctionalSamples out;
  out.params = params;
  out.n_paths = n_paths;
  out.n_steps = n_steps;
  out.seed = seed;
  out.sampler = std::string(sampler->name());
  out.drawdown_coarse.resize(n_paths);
  out.drawdown_fine.resize(n_paths);
  out.drawup_coarse.resize(n_paths);
  out.drawup_fine.resize(n_paths);

  const std::size_t n_pairs = (n_paths + 1) / 2;
  parallel_for_ranges(n_pairs, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> a(fine.size());
    std::vector<double> b(fine.size());
    for (std::size_t pair = begin; pair < end; ++pair) {
      sampler->fill_pair(stream_seed(seed, pair), a, b);
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t i = 2 * pair + c;
        if (i >= n_paths) break;
        const Maxima m = scan(c == 0 ? a : b, trend);
        out.drawdown_coarse[i] = m.dd_coarse;
        out.drawdown_fine[i] = m.dd_fine;
        out.drawup_coarse[i] = m.du_coarse;
        out.drawup_fine[i] = m.du_fine;
      }
    }
  });
  return out;
}

McTailResult tail_from_samples(const FunctionalSamples& samples, Functional functional, double u) {
  McTailResult r;
  r.query = {functional, u, samples.params};
  r.coarse = make_estimate(count_above(samples.coarse(functional), u), samples.n_paths,
                           samples.n_steps);
  r.fine = make_estimate(count_above(samples.fine(functional), u), samples.n_paths,
                         2 * samples.n_steps);
  const double rate = std::pow(2.0, samples.params.hurst) - 1.0;
  r.extrapolated = std::clamp(r.fine.p_hat + (r.fine.p_hat - r.coarse.p_hat) / rate, 0.0, 1.0);
  r.fine.extrapolated = r.extrapolated;
  r.coarse.extrapolated = r.extrapolated;
  std::ostringstream os;
  os << "grid maxima underestimate the continuous supremum; extrapolated value assumes "
        "a dt^H bias (heuristic)";
  r.bias_note = os.str();
  return r;
}

McTailResult mc_tail(const TailQuery& query, std::size_t n_paths, std::size_t n_steps,
                     std::uint64_t seed, const SimulationOptions& options) {
  query.params.validate();
  if (std::isnan(query.u)) throw DomainError("threshold u is NaN");
  if (n_paths < 1000) throw DomainError("mc_tail needs at least 1000 paths");
  const FunctionalSamples samples = simulate_functionals(query.params, n_paths, n_steps, seed,
                                                         options);
  return tail_from_samples(samples, query.functional, query.u);
}

TrendStatistic trend_statistic(const std::vector<ConvergenceRow>& rows) {
  TrendStatistic t;
  if (rows.size() < 2) return t;
  t.steps = rows.size() - 1;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const ConvergenceRow& a = rows[k];
    const ConvergenceRow& b = rows[k + 1];
    const double pooled = std::sqrt(a.ratio_se * a.ratio_se + b.ratio_se * b.ratio_se);
    if (std::abs(b.ratio - 1.0) <= std::abs(a.ratio - 1.0) + 3.0 * pooled) ++t.steps_toward_one;
    if (b.ratio >= a.ratio - 3.0 * pooled) ++t.steps_nondecreasing;
  }
  t.monotone_toward_one = t.steps_toward_one == t.steps;
  return t;
}

ConvergenceTable convergence_study(const FunctionalSamples& samples, Functional functional,
                                   const std::vector<double>& u_ladder,
                                   ConstantsProvider& constants, DrawupVariant variant) {
  ConvergenceTable table;
  table.functional = functional;
  table.params = samples.params;
  if (functional == Functional::drawup && drawup_regime(samples.params.hurst) ==
                                              Regime::DU_H_lt_half) {
    table.variant = variant;
  }
  for (double u : u_ladder) {
    ConvergenceRow row;
    row.u = u;
    row.asym = asym_tail(functional, u, samples.params, constants, variant);
    row.mc = tail_from_samples(samples, functional, u);
    const double a = row.asym.probability;
    row.ratio = row.mc.fine.p_hat / a;
    row.ratio_low = row.mc.fine.ci_low / a;
    row.ratio_high = row.mc.fine.ci_high / a;
    row.ratio_se = row.mc.fine.std_error() / a;
    table.rows.push_back(std::move(row));
  }
  if (table.rows.size() >= 2) table.trend = trend_statistic(table.rows);
  return table;
}

ConvergenceTable convergence_study(Functional functional, const ModelParams& params,
                                   const std::vector<double>& u_ladder,
                                   const ConvergenceBudget& budget, ConstantsProvider& constants) {
  if (u_ladder.empty()) throw DomainError("u ladder is empty");
  // Fail on asymptotic preconditions before spending the simulation budget.
  for (double u : u_ladder) asym_tail(functional, u, params, constants, budget.variant);
  const FunctionalSamples samples =
      simulate_functionals(params, budget.n_paths, budget.n_steps, budget.seed, budget.simulation);
  return convergence_study(samples, functional, u_ladder, constants, budget.variant);
}

}  // namespace fbmlab
