#include <cmath>

#include "doctest.h"

#include "fbmlab/validation.hpp"

using namespace fbmlab;

namespace {

ModelParams model(double H, double T = 1.0, double mu = 0.0) {
  ModelParams p;
  p.hurst = H;
  p.horizon = T;
  p.drift = mu;
  return p;
}

}  // namespace

TEST_CASE("Wilson interval") {
  const ProportionInterval a = wilson_interval(50, 100);
  CHECK(a.low == doctest::Approx(0.40383153).epsilon(1e-7));
  CHECK(a.high == doctest::Approx(0.59616847).epsilon(1e-7));
  const ProportionInterval zero = wilson_interval(0, 1000);
  CHECK(zero.low == 0.0);
  CHECK(zero.high > 3.0 / 1000);
  CHECK(zero.high < 4.0 / 1000);
  const ProportionInterval all = wilson_interval(1000, 1000);
  CHECK(all.high == 1.0);
  CHECK(all.low < 1.0);
}

TEST_CASE("Wilson intervals cover a known proportion") {
  // Exact coverage: sum of binomial weights of the hit counts whose interval
  // contains p. This is the expectation of the covered/repetitions ratio.
  // Wilson coverage dips to about 0.92 near n*p = 1, so only n*p >= 5.
  for (double p : {0.01, 0.07, 0.3, 0.5}) {
    for (std::size_t n : {100u, 2000u}) {
      if (n * p < 5.0) continue;
      double coverage = 0.0;
      for (std::size_t k = 0; k <= n; ++k) {
        const ProportionInterval ci = wilson_interval(k, n);
        if (ci.low <= p && p <= ci.high) {
          coverage += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                               std::lgamma(n - k + 1.0) + k * std::log(p) +
                               (n - k) * std::log1p(-p));
        }
      }
      CHECK(coverage >= 0.93);
    }
  }
}

TEST_CASE("estimate invariants") {
  const McEstimate e = make_estimate(17, 1000, 64);
  CHECK(e.p_hat == 0.017);
  CHECK(0.0 <= e.ci_low);
  CHECK(e.ci_low <= e.p_hat);
  CHECK(e.p_hat <= e.ci_high);
  CHECK(e.ci_high <= 1.0);
  CHECK(e.std_error() == doctest::Approx(std::sqrt(0.017 * 0.983 / 1000)));
}

TEST_CASE("trivial thresholds") {
  const TailQuery tiny{Functional::drawdown, 1e-12, model(0.4)};
  const McTailResult r = mc_tail(tiny, 2000, 64, 1);
  CHECK(r.coarse.p_hat == 1.0);
  CHECK(r.fine.p_hat == 1.0);
  const TailQuery huge{Functional::drawup, 1e6, model(0.4)};
  const McTailResult h = mc_tail(huge, 2000, 64, 1);
  CHECK(h.fine.p_hat == 0.0);
  CHECK(h.fine.ci_high < 4.0 / 2000);
  CHECK_THROWS_AS(mc_tail(tiny, 999, 64, 1), DomainError);
}

TEST_CASE("samples do not depend on the thread count") {
  SimulationOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const FunctionalSamples a = simulate_functionals(model(0.7, 2.0, 0.3), 1001, 128, 5, one);
  const FunctionalSamples b = simulate_functionals(model(0.7, 2.0, 0.3), 1001, 128, 5, three);
  CHECK(a.drawdown_fine == b.drawdown_fine);
  CHECK(a.drawup_coarse == b.drawup_coarse);
  CHECK(a.sampler == "circulant");
  // path i depends on (seed, i) only, not on how many paths are drawn
  const FunctionalSamples c = simulate_functionals(model(0.7, 2.0, 0.3), 500, 128, 5, one);
  for (std::size_t i = 0; i < 500; ++i) CHECK(c.drawdown_fine[i] == a.drawdown_fine[i]);
}

TEST_CASE("coarse maxima never exceed fine maxima") {
  const FunctionalSamples s = simulate_functionals(model(0.3), 2000, 64, 8);
  for (std::size_t i = 0; i < s.n_paths; ++i) {
    CHECK(s.drawdown_coarse[i] <= s.drawdown_fine[i]);
    CHECK(s.drawup_coarse[i] <= s.drawup_fine[i]);
  }
  const McTailResult r = tail_from_samples(s, Functional::drawdown, 0.8);
  CHECK(r.fine.p_hat >= r.coarse.p_hat);
  CHECK(r.extrapolated >= r.fine.p_hat);
  CHECK(r.extrapolated <= 1.0);
  CHECK(r.fine.n_steps == 128);
  CHECK(r.coarse.n_steps == 64);
}

TEST_CASE("Brownian drawdown tail against the closed-form asymptotic") {
  ConstantsProvider c(ConstantsProvider::Policy::closed_form_first);
  ConvergenceBudget budget;
  budget.n_paths = 20000;
  budget.n_steps = 1024;
  const ConvergenceTable t =
      convergence_study(Functional::drawdown, model(0.5), {2.0}, budget, c);
  REQUIRE(t.rows.size() == 1);
  CHECK_FALSE(t.trend.has_value());
  CHECK(t.rows[0].asym.probability == doctest::Approx(4.0 * 0.066807201268858066));
  CHECK(t.rows[0].ratio > 0.55);
  CHECK(t.rows[0].ratio < 0.85);
  CHECK(t.rows[0].ratio_low <= t.rows[0].ratio);
  CHECK(t.rows[0].ratio <= t.rows[0].ratio_high);
}

TEST_CASE("smooth regime ratio stays in a loose band") {
  ConstantsProvider c(ConstantsProvider::Policy::closed_form_first);
  ConvergenceBudget budget;
  budget.n_paths = 20000;
  budget.n_steps = 512;
  const ConvergenceTable t =
      convergence_study(Functional::drawdown, model(0.75), {1.5, 2.0}, budget, c);
  REQUIRE(t.trend.has_value());
  CHECK(t.trend->steps == 1);
  for (const ConvergenceRow& row : t.rows) {
    CHECK(row.ratio > 0.5);
    CHECK(row.ratio < 1.5);
  }
}

TEST_CASE("convergence study rejects ladders outside the asymptotic region") {
  ConstantsProvider c(ConstantsProvider::Policy::closed_form_first);
  CHECK_THROWS_AS(convergence_study(Functional::drawdown, model(0.5), {0.2}, {}, c),
                  PreconditionError);
  CHECK_THROWS_AS(convergence_study(Functional::drawdown, model(0.5), {}, {}, c), DomainError);
}

TEST_CASE("trend statistic") {
  std::vector<ConvergenceRow> rows(3);
  rows[0].ratio = 0.60;
  rows[1].ratio = 0.70;
  rows[2].ratio = 0.80;
  for (auto& r : rows) r.ratio_se = 0.001;
  TrendStatistic t = trend_statistic(rows);
  CHECK(t.steps == 2);
  CHECK(t.steps_toward_one == 2);
  CHECK(t.steps_nondecreasing == 2);
  CHECK(t.monotone_toward_one);
  rows[2].ratio = 0.50;
  t = trend_statistic(rows);
  CHECK(t.steps_toward_one == 1);
  CHECK_FALSE(t.monotone_toward_one);
  // within three pooled standard errors counts as no change
  rows[2].ratio = 0.696;
  CHECK(trend_statistic(rows).monotone_toward_one);
}
