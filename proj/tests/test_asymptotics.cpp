#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "fbmlab/asymptotics.hpp"
#include "fbmlab/special.hpp"

using namespace fbmlab;

namespace {

ModelParams model(double H, double T = 1.0, double mu = 0.0) {
  ModelParams p;
  p.hurst = H;
  p.horizon = T;
  p.drift = mu;
  return p;
}

ConstantsProvider offline() { return ConstantsProvider(ConstantsProvider::Policy::closed_form_first); }

// Brute-force minimum of the m2 objective on a dense grid in log(s) and s.
double dense_m2(double u, const ModelParams& p) {
  double best = m2_objective(0.0, u, p);
  for (int k = 0; k <= 200000; ++k) {
    const double s = p.horizon * std::pow(10.0, -14.0 + 14.0 * k / 200000.0) * (1.0 - 1e-9);
    best = std::min(best, m2_objective(s, u, p));
  }
  return best;
}

}  // namespace

TEST_CASE("regime dispatch") {
  CHECK(drawdown_regime(0.75) == Regime::DD_H_gt_half);
  CHECK(drawdown_regime(0.5) == Regime::DD_H_eq_half);
  CHECK(drawdown_regime(0.35) == Regime::DD_quarter_lt_H_lt_half);
  CHECK(drawdown_regime(0.25) == Regime::DD_H_eq_quarter);
  CHECK(drawdown_regime(0.1) == Regime::DD_H_lt_quarter);
  CHECK(drawup_regime(0.75) == Regime::DU_H_gt_half);
  CHECK(drawup_regime(0.5) == Regime::DU_H_eq_half);
  CHECK(drawup_regime(0.3) == Regime::DU_H_lt_half);
  // probes just off the boundaries select the neighbouring open regimes
  CHECK(drawdown_regime(0.5 + 1e-12) == Regime::DD_H_gt_half);
  CHECK(drawdown_regime(0.5 - 1e-12) == Regime::DD_quarter_lt_H_lt_half);
  CHECK(drawdown_regime(0.25 + 1e-12) == Regime::DD_quarter_lt_H_lt_half);
  CHECK(drawdown_regime(0.25 - 1e-12) == Regime::DD_H_lt_quarter);
  CHECK(drawup_regime(0.5 + 1e-12) == Regime::DU_H_gt_half);
  CHECK(drawup_regime(0.5 - 1e-12) == Regime::DU_H_lt_half);
  CHECK_THROWS_AS(drawdown_regime(1.0), DomainError);
}

TEST_CASE("threshold functions") {
  CHECK(threshold_m(2.0, model(0.5)) == 1.5);
  CHECK(threshold_m1(2.0, model(0.5)) == 2.5);
  CHECK(threshold_m(3.0, model(0.75, 4.0, 0.5)) ==
        doctest::Approx((3.0 + 2.0 - 0.5 * 8.0) / std::pow(4.0, 0.75)));
  CHECK_THROWS_AS(threshold_m(0.4, model(0.5)), PreconditionError);
  CHECK_THROWS_AS(threshold_m(-1.0, model(0.5)), DomainError);
  CHECK_THROWS_AS(threshold_m1(0.1, model(0.5, 1.0, 2.0)), PreconditionError);
  try {
    threshold_m(0.4, model(0.5));
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("threshold too small for asymptotic regime") == 0);
  }
}

TEST_CASE("m2 minimisation against a dense scan") {
  for (double H : {0.1, 0.25, 0.35, 0.45}) {
    for (double u : {1.0, 3.0, 30.0}) {
      const ModelParams p = model(H, 1.2, 0.1);
      const M2Result r = threshold_m2(u, p);
      CHECK(r.value <= dense_m2(u, p) * (1.0 + 1e-12));
      CHECK(r.value == doctest::Approx(m2_objective(r.s_star, u, p)).epsilon(1e-15));
    }
  }
  const M2Result r = threshold_m2(3.0, model(0.35, 1.2, 0.1));
  CHECK(r.value == doctest::Approx(3.2253546770731014).epsilon(1e-12));
  CHECK(r.s_star == doctest::Approx(0.021063086286221300).epsilon(1e-6));
}

TEST_CASE("m2 minimiser scales like u^{-1/(1-2H)}") {
  const M2Result r = threshold_m2(100.0, model(0.25));
  CHECK(r.s_star > 0.5e-4);
  CHECK(r.s_star < 2e-4);
  CHECK(r.s_star == doctest::Approx(9.8997649048398330e-05).epsilon(1e-6));
}

TEST_CASE("s_u fixed point") {
  const ModelParams p = model(0.25);
  const double s = solve_s_u(1e4, p);
  CHECK(s == doctest::Approx(9.9989999750149991e-09).epsilon(1e-10));
  CHECK(std::abs(s * 1e8 - 1.0) < 0.05);
  CHECK(s_u_map(s, 1e4, p) == doctest::Approx(s).epsilon(1e-11));
  const ModelParams q = model(0.35, 1.2, 0.1);
  CHECK(solve_s_u(3.0, q) == doctest::Approx(0.021063086286221300).epsilon(1e-10));
  CHECK_THROWS_AS(solve_s_u(10.0, model(0.6)), DomainError);
  CHECK_THROWS_AS(solve_s_u(10.0, model(0.5)), DomainError);
}

TEST_CASE("s_u is the maximiser of the drawup standard deviation") {
  const ModelParams p = model(0.25);
  const double u = 1e4;
  double best_s = 0.0, best = -1.0;
  for (int k = 0; k <= 400000; ++k) {
    const double s = std::pow(10.0, -12.0 + 8.0 * k / 400000.0);
    const double sigma = std::pow(1.0 - s, 0.25) / (u + 0.5 * (1.0 - std::pow(s, 0.5)));
    if (sigma > best) {
      best = sigma;
      best_s = s;
    }
  }
  CHECK(std::abs(best_s / solve_s_u(u, p) - 1.0) < 0.01);
}

TEST_CASE("Brownian closed forms") {
  ConstantsProvider c = offline();
  const AsymptoticResult dd = asym_drawdown(2.0, model(0.5), c);
  CHECK(dd.regime == Regime::DD_H_eq_half);
  CHECK(dd.prefactor == 4.0);
  CHECK(dd.probability == doctest::Approx(4.0 * 0.066807201268858066).epsilon(1e-14));
  CHECK(dd.constants_used.piterbarg->provenance == Provenance::closed_form);
  const AsymptoticResult du = asym_drawup(2.0, model(0.5), c);
  CHECK(du.regime == Regime::DU_H_eq_half);
  CHECK(du.probability == doctest::Approx(4.0 * 0.0062096653257761352).epsilon(1e-13));
  CHECK_FALSE(du.variant.has_value());
}

TEST_CASE("smooth regimes carry no prefactor") {
  ConstantsProvider c = offline();
  const AsymptoticResult dd = asym_drawdown(2.0, model(0.75), c);
  CHECK(dd.probability == doctest::Approx(0.066807201268858066).epsilon(1e-14));
  CHECK(dd.power_exponent == 0.0);
  const AsymptoticResult du = asym_drawup(1.5, model(0.75), c);
  CHECK(du.probability == doctest::Approx(psi(2.0)).epsilon(1e-15));
}

TEST_CASE("rough drawdown regimes against reference values") {
  ConstantsProvider c = offline();
  c.supply(ConstantKind::pickands, 0.2, std::nullopt, 0.7);
  c.supply(ConstantKind::pickands, 0.35, std::nullopt, 0.8);
  c.supply(ConstantKind::pickands, 0.25, std::nullopt, 0.9);

  const AsymptoticResult a = asym_drawdown(5.0, model(0.2, 1.5, 0.1), c);
  CHECK(a.regime == Regime::DD_H_lt_quarter);
  CHECK(a.threshold_value == doctest::Approx(4.2066198585320487).epsilon(1e-14));
  CHECK(a.probability == doctest::Approx(0.068138493566057997).epsilon(1e-12));
  CHECK(a.power_exponent == doctest::Approx(5.5));
  CHECK(a.constants_used.pickands->provenance == Provenance::supplied);

  const AsymptoticResult b = asym_drawdown(4.0, model(0.35, 2.0, -0.2), c);
  CHECK(b.regime == Regime::DD_quarter_lt_H_lt_half);
  CHECK(b.probability == doctest::Approx(0.073568612762395959).epsilon(1e-12));

  const AsymptoticResult q = asym_drawdown(6.0, model(0.25, 1.3, 0.3), c);
  CHECK(q.regime == Regime::DD_H_eq_quarter);
  CHECK(q.power_exponent == 4.0);
  CHECK(q.probability == doctest::Approx(8.7935144139142497e-06).epsilon(1e-11));
}

TEST_CASE("rough drawup variants") {
  ConstantsProvider c = offline();
  c.supply(ConstantKind::pickands, 0.35, std::nullopt, 0.8);
  const ModelParams p = model(0.35, 1.2, 0.1);
  const AsymptoticResult st = asym_drawup(3.0, p, c, DrawupVariant::statement);
  const AsymptoticResult pd = asym_drawup(3.0, p, c, DrawupVariant::proof_derived);
  CHECK(st.regime == Regime::DU_H_lt_half);
  CHECK(st.probability == doctest::Approx(0.0099652328111415182).epsilon(1e-11));
  CHECK(pd.probability == doctest::Approx(0.0069203005632927210).epsilon(1e-11));
  CHECK(st.prefactor / pd.prefactor == doctest::Approx(1.44).epsilon(1e-14));
  CHECK(pd.variant == DrawupVariant::proof_derived);
  CHECK(pd.variant_note.has_value());
  CHECK(pd.thresholds.s_u.has_value());
  CHECK(pd.thresholds.s_star.has_value());
  CHECK(drawup_rough_constant(0.35, 1.2, DrawupVariant::statement) ==
        doctest::Approx(1.2547459429407705).epsilon(1e-14));
  CHECK(drawup_rough_constant(0.35, 1.2, DrawupVariant::proof_derived) ==
        doctest::Approx(0.87135134926442398).epsilon(1e-14));
  for (double T : {0.3, 1.0, 2.0, 7.5}) {
    for (double H : {0.05, 0.2, 0.45}) {
      const double ratio = drawup_rough_constant(H, T, DrawupVariant::statement) /
                           drawup_rough_constant(H, T, DrawupVariant::proof_derived);
      CHECK(ratio == doctest::Approx(T * T).epsilon(1e-13));
    }
  }
}

TEST_CASE("results recompose from their fields and log probability is consistent") {
  ConstantsProvider c = offline();
  for (double H : {0.1, 0.25, 0.35, 0.5, 0.75}) c.supply(ConstantKind::pickands, H, std::nullopt, 0.9);
  for (double H : {0.1, 0.25, 0.35, 0.5, 0.75}) {
    for (double u : {2.0, 5.0, 40.0}) {
      for (Functional f : {Functional::drawdown, Functional::drawup}) {
        const AsymptoticResult r = asym_tail(f, u, model(H, 1.3, 0.2), c);
        CHECK(r.recompose() == r.probability);
        if (r.probability > 1e-300) {
          CHECK(r.log_probability == doctest::Approx(std::log(r.probability)).epsilon(1e-12));
        }
      }
    }
  }
  const AsymptoticResult far = asym_drawdown(200.0, model(0.75), c);
  CHECK(far.probability == 0.0);
  CHECK(std::isfinite(far.log_probability));
}

TEST_CASE("missing constants are reported under the offline policy") {
  ConstantsProvider c = offline();
  CHECK_THROWS_AS(asym_drawdown(3.0, model(0.3), c), std::runtime_error);
}
