#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relinfo/binomial.hpp"

using namespace relinfo;

namespace {

const BinomialModel model = binomial_model();

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

Ri1Options route(ExpectationRoute r, std::uint64_t draws = 10000) {
  Ri1Options o;
  o.route = r;
  o.mc.n_draws = draws;
  return o;
}

}  // namespace

// ---- lod ----

TEST(Lod, IdenticalHypothesesGiveZero) {
  EXPECT_EQ(lod(model, HypothesisPair<double>{0.5, 0.5}, BinomialObserved{5, 10, 0}), 0.0);
}

TEST(Lod, DirectEvaluation) {
  const double expected = 7 * std::log(1.4) + 3 * std::log(0.6);
  const double got = lod(model, HypothesisPair<double>{0.5, 0.7}, BinomialObserved{7, 10, 0});
  EXPECT_NEAR(got, expected, 1e-14);
  EXPECT_NEAR(got, 0.8228, 5e-5);
}

TEST(Lod, MleMaximizesOverGrid) {
  const BinomialObserved obs{13, 40, 7};
  const double mle = model.mle(obs);
  const double at_mle = lod(model, HypothesisPair<double>{0.5, mle}, obs);
  for (int k = 1; k < 200; ++k) {
    const double p = k / 200.0;
    if (p == mle) continue;
    EXPECT_GE(at_mle, lod(model, HypothesisPair<double>{0.5, p}, obs));
  }
}

TEST(Lod, BoundaryValueWithInfiniteLikelihoodIsDomainError) {
  EXPECT_EQ(code_of([] { lod(model, HypothesisPair<double>{0.5, 0.0}, BinomialObserved{3, 10, 0}); }),
            ErrorCode::domain);
  // x = 0 at p = 0 is a finite limit.
  EXPECT_NEAR(lod(model, HypothesisPair<double>{0.5, 0.0}, BinomialObserved{0, 10, 0}), -10 * std::log(0.5), 1e-12);
}

TEST(Lod, ParameterOutsideDomain) {
  EXPECT_EQ(code_of([] { lod(model, HypothesisPair<double>{0.5, 1.2}, BinomialObserved{3, 10, 0}); }),
            ErrorCode::domain);
}

// ---- model ----

TEST(BinomialModel, MleIsProportion) { EXPECT_DOUBLE_EQ(model.mle(BinomialObserved{30, 50, 10}), 0.6); }

TEST(BinomialModel, ValidationRejectsImpossibleData) {
  EXPECT_EQ(code_of([] { BinomialObserved{11, 10, 0}.validate(); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { BinomialObserved{0, 0, 3}.validate(); }), ErrorCode::invalid_argument);
}

TEST(BinomialModel, CompletionWithNothingMissing) {
  DrawRng rng(1, 0);
  const auto c = model.draw_completion(BinomialObserved{4, 9, 0}, 0.3, rng);
  EXPECT_EQ(c.missing_successes, 0u);
  EXPECT_EQ(c.successes_total(), 4u);
  EXPECT_EQ(c.n_total(), 9u);
}

TEST(BinomialModel, CompletionMean) {
  std::vector<double> added(20000);
  for (std::size_t i = 0; i < added.size(); ++i) {
    DrawRng rng(2, i);
    added[i] = static_cast<double>(model.draw_completion(BinomialObserved{30, 50, 50}, 0.6, rng).missing_successes);
  }
  const auto m = oracle::moments(added);
  EXPECT_NEAR(m.mean, 30.0, 3 * m.se());
}

// ---- ri1 ----

TEST(Ri1, NoMissingDataIsOne) {
  const BinomialObserved obs{30, 50, 0};
  EXPECT_EQ(ri1(model, obs, 0.5, route(ExpectationRoute::imputation)).estimate, 1.0);
  EXPECT_EQ(ri1_closed_form(obs), 1.0);
}

TEST(Ri1, HalfMissing) {
  const BinomialObserved obs{30, 50, 50};
  EXPECT_NEAR(ri1(model, obs, 0.5, route(ExpectationRoute::imputation)).estimate, 0.5, 1e-12);
  EXPECT_EQ(ri1_closed_form(obs), 0.5);
  EXPECT_EQ(ri1(model, obs, 0.5).method, Method::sufficient_stat_imputation);
}

TEST(Ri1, EnumerationOracleMatchesClosedForm) {
  // Full enumeration over Binomial(50, 0.6) missing successes.
  const double p = 0.6;
  const double lod_ob = oracle::binom_lod(30, 50, p, 0.5);
  const double expected = oracle::expect_missing(50, p, [&](std::uint64_t k) {
    return oracle::binom_lod(30.0 + static_cast<double>(k), 100, p, 0.5);
  });
  EXPECT_NEAR(lod_ob / expected, 0.5, 1e-12);
}

TEST(Ri1, MonteCarloWithinThreeSe) {
  const auto r = ri1(model, BinomialObserved{30, 50, 50}, 0.5, route(ExpectationRoute::monte_carlo));
  EXPECT_EQ(r.method, Method::monte_carlo);
  EXPECT_EQ(r.n_draws, 10000u);
  EXPECT_GT(r.mc_standard_error, 0.0);
  EXPECT_NEAR(r.estimate, 0.5, 3 * r.mc_standard_error);
  EXPECT_TRUE(r.flags & kFlagDeltaMethodSE);
}

TEST(Ri1, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(ri1_closed_form(BinomialObserved{8, 20, 80}), 0.2);
  EXPECT_EQ(code_of([] { ri1_closed_form(BinomialObserved{0, 20, 5}); }), ErrorCode::boundary);
  EXPECT_EQ(code_of([] { ri1_closed_form(BinomialObserved{20, 20, 5}); }), ErrorCode::boundary);
}

TEST(Ri1, ZeroObservedLodIsUndefined) {
  EXPECT_EQ(code_of([] { ri1(model, BinomialObserved{25, 50, 10}, 0.5); }), ErrorCode::undefined_measure);
}

TEST(Ri1, BoundaryMleRefused) {
  EXPECT_EQ(code_of([] { ri1(model, BinomialObserved{0, 50, 10}, 0.5); }), ErrorCode::boundary);
}

TEST(Ri1, NegativeLodAtFixedPairIsUndefined) {
  const BinomialObserved obs{30, 50, 10};
  EXPECT_EQ(code_of([&] { ri1_at(model, obs, HypothesisPair<double>{0.5, 0.3}, 0.6); }),
            ErrorCode::undefined_measure);
}

TEST(Ri1, RangePropertyOnRandomInstances) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t n_ob = 2 + gen() % 80;
    const std::uint64_t x = 1 + gen() % (n_ob - 1);
    const std::uint64_t n_mis = gen() % 60;
    const double p0 = 0.05 + 0.9 * std::uniform_real_distribution<double>()(gen);
    const BinomialObserved obs{x, n_ob, n_mis};
    if (std::abs(model.mle(obs) - p0) < 1e-9) continue;
    const double r = ri1(model, obs, p0).estimate;
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1.0 + 1e-12);
    if (n_mis == 0) {
      EXPECT_EQ(r, 1.0);
    } else {
      EXPECT_LT(r, 1.0);
    }
  }
}

// ---- enumeration ----

TEST(Enumerate, Normalization) {
  EXPECT_NEAR(enumerate_expectation(BinomialObserved{30, 50, 10}, 0.6, [](const BinomialComplete&) { return 1.0; }),
              1.0, 1e-13);
}

TEST(Enumerate, LinearFunctional) {
  EXPECT_NEAR(enumerate_expectation(BinomialObserved{30, 50, 10}, 0.6,
                                    [](const BinomialComplete& c) { return double(c.successes_total()); }),
              36.0, 1e-12);
}

TEST(Enumerate, LodScalesWithTrials) {
  const BinomialObserved obs{30, 50, 10};
  const HypothesisPair<double> pair{0.5, 0.6};
  const double lod_ob = lod(model, pair, obs);
  const double e = enumerate_expectation(obs, 0.6, [&](const BinomialComplete& c) { return lod(model, pair, c); });
  EXPECT_NEAR(e, (60.0 / 50.0) * lod_ob, 1e-12);
  EXPECT_NEAR(lod_ob, oracle::binom_lod(30, 50, 0.6, 0.5), 1e-13);
}

TEST(Enumerate, CapExceeded) {
  EXPECT_EQ(code_of([] {
              enumerate_expectation(BinomialObserved{30, 50, 26}, 0.6, [](const BinomialComplete&) { return 1.0; });
            }),
            ErrorCode::oracle_unavailable);
  EXPECT_NO_THROW(
      enumerate_expectation(BinomialObserved{30, 50, 26}, 0.6, [](const BinomialComplete&) { return 1.0; }, 30));
}

TEST(Enumerate, LinearFunctionalEqualsImputedStatistic) {
  for (std::uint64_t m : {0u, 3u, 17u, 25u}) {
    const BinomialObserved obs{12, 31, m};
    const double p = 0.37;
    const double e = enumerate_expectation(obs, p, [](const BinomialComplete& c) { return double(c.successes_total()); });
    EXPECT_NEAR(e, model.impute_sufficient(obs, p).successes, 1e-11);
  }
}

// ---- ri0 ----

TEST(Ri0, WorkedExample) {
  const auto r = ri0(model, BinomialObserved{30, 50, 50}, 0.5);
  const double lod_imp = 55 * std::log(1.1) + 45 * std::log(0.9);
  const double lod_ob = 30 * std::log(1.2) + 20 * std::log(0.8);
  EXPECT_NEAR(r.estimate, lod_imp / lod_ob, 1e-13);
  EXPECT_NEAR(r.estimate, 0.4975, 5e-5);
  EXPECT_NEAR(r.numerator, lod_ob, 1e-13);
  EXPECT_NEAR(r.denominator, lod_imp, 1e-13);
  EXPECT_TRUE(r.flags & kFlagNullImputationOrientation);
}

TEST(Ri0, NoMissingDataIsOne) { EXPECT_NEAR(ri0(model, BinomialObserved{30, 50, 0}, 0.5).estimate, 1.0, 1e-15); }

TEST(Ri0, NullAtMleIsUndefined) {
  EXPECT_EQ(code_of([] { ri0(model, BinomialObserved{30, 50, 50}, 0.6); }), ErrorCode::undefined_measure);
}

namespace {

// Exposes only the generic contract, so exponential-family operations are unavailable.
struct GenericBinomial {
  using Parameter = double;
  using Observed = BinomialObserved;
  using Complete = BinomialComplete;
  BinomialModel inner;
  double log_likelihood(double p, const Observed& o) const { return inner.log_likelihood(p, o); }
  double log_likelihood(double p, const Complete& c) const { return inner.log_likelihood(p, c); }
  double mle(const Observed& o) const { return inner.mle(o); }
  double mle(const Complete& c) const { return inner.mle(c); }
  Complete draw_completion(const Observed& o, double p, DrawRng& rng) const { return inner.draw_completion(o, p, rng); }
  Observed reduce(const Complete& c) const { return c.observed; }
  bool in_domain(double p) const { return inner.in_domain(p); }
  bool is_interior(double p) const { return inner.is_interior(p); }
};

static_assert(MissingDataModel<GenericBinomial>);
static_assert(!ExponentialFamilyModel<GenericBinomial>);

}  // namespace

TEST(Ri0, UnsupportedForGenericModels) {
  EXPECT_EQ(code_of([] { ri0(GenericBinomial{}, BinomialObserved{30, 50, 50}, 0.5); }), ErrorCode::unsupported);
}

TEST(Ri1, GenericModelFallsBackToMonteCarlo) {
  const auto r = ri1(GenericBinomial{}, BinomialObserved{30, 50, 50}, 0.5);
  EXPECT_EQ(r.method, Method::monte_carlo);
  EXPECT_NEAR(r.estimate, 0.5, 3 * r.mc_standard_error);
  EXPECT_EQ(code_of([] {
              ri1(GenericBinomial{}, BinomialObserved{30, 50, 50}, 0.5, route(ExpectationRoute::imputation));
            }),
            ErrorCode::unsupported);
}

// ---- ri_y ----

TEST(RiY, NoMissingDataAllOnes) {
  RiYOptions o;
  o.mc.n_draws = 100;
  const auto s = ri_y_samples(model, BinomialObserved{30, 50, 0}, HypothesisPair<double>{0.5, 0.65}, o);
  for (double v : s.samples) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(s.sentinel_count, 0u);
}

TEST(RiY, ReciprocalMeanMatchesReciprocalRi1) {
  const BinomialObserved obs{30, 50, 50};
  const HypothesisPair<double> pair{0.5, 0.65};
  RiYOptions o;
  o.mc.n_draws = 10000;
  const auto s = ri_y_samples(model, obs, pair, o);
  const auto recip = reciprocal_mean(s);
  const double r1 = ri1_at(model, obs, pair, model.mle(obs)).estimate;
  EXPECT_NEAR(recip.mean, 1.0 / r1, 3 * recip.standard_error);
  EXPECT_GT(ri_y_spread(s), 0.0);
}

TEST(RiY, ReciprocalMeanMatchesEnumeration) {
  const BinomialObserved obs{30, 50, 20};
  const double lod_ob = oracle::binom_lod(30, 50, 0.65, 0.5);
  const double expected = oracle::expect_missing(20, 0.6, [&](std::uint64_t k) {
    return oracle::binom_lod(30.0 + static_cast<double>(k), 70, 0.65, 0.5) / lod_ob;
  });
  RiYOptions o;
  o.mc.n_draws = 10000;
  const auto recip = reciprocal_mean(ri_y_samples(model, obs, HypothesisPair<double>{0.5, 0.65}, o));
  EXPECT_NEAR(recip.mean, expected, 3 * recip.standard_error);
}

TEST(RiY, ZeroCompleteLodBecomesSentinel) {
  // Pair (0.4, 0.6) is symmetric: a complete count of exactly half gives lod 0.
  RiYOptions o;
  o.mc.n_draws = 2000;
  const auto s = ri_y_samples(model, BinomialObserved{3, 4, 4}, HypothesisPair<double>{0.4, 0.6}, o);
  EXPECT_GT(s.sentinel_count, 0u);
  std::uint64_t inf = 0;
  for (double v : s.samples) inf += std::isinf(v);
  EXPECT_EQ(inf, s.sentinel_count);
  EXPECT_EQ(reciprocal_mean(s).sentinel_count, s.sentinel_count);
}

// ---- lod ratio variance ----

TEST(LodRatioVariance, NoMissingIsZero) {
  MCConfig mc;
  mc.n_draws = 200;
  EXPECT_EQ(lod_ratio_variance(model, BinomialObserved{30, 50, 0}, 0.5, mc).estimate, 0.0);
}

TEST(LodRatioVariance, MatchesEnumeration) {
  const double p = 0.6;
  const double lod_ob = oracle::binom_lod(30, 50, p, 0.5);
  auto lod_co = [&](std::uint64_t k) {
    const double x = 30.0 + static_cast<double>(k);
    return oracle::binom_lod(x, 60, x / 60.0, 0.5);
  };
  const double m1 = oracle::expect_missing(10, p, lod_co);
  const double m2 = oracle::expect_missing(10, p, [&](std::uint64_t k) { return lod_co(k) * lod_co(k); });
  const double expected = (m2 - m1 * m1) / (lod_ob * lod_ob);
  MCConfig mc;
  mc.n_draws = 10000;
  const auto r = lod_ratio_variance(model, BinomialObserved{30, 50, 10}, 0.5, mc);
  EXPECT_GE(r.estimate, 0.0);
  EXPECT_NEAR(r.estimate, expected, 3 * r.mc_standard_error);
}

// ---- expected lod gap ----

TEST(ExpectedLodGap, NoMissingIsZeroGap) {
  MCConfig mc;
  mc.n_draws = 100;
  const auto g = expected_lod_gap(model, BinomialObserved{30, 50, 0}, 0.5, mc);
  EXPECT_NEAR(g.at_complete_mle.mean, g.observed_lod, 1e-12);
  EXPECT_NEAR(g.at_observed_mle.mean, g.observed_lod, 1e-12);
  EXPECT_EQ(g.gap.mean, 0.0);
}

TEST(ExpectedLodGap, StrictlyPositiveAndMatchesEnumeration) {
  const BinomialObserved obs{30, 50, 20};
  const double p = 0.6;
  const double first = oracle::expect_missing(20, p, [&](std::uint64_t k) {
    const double x = 30.0 + static_cast<double>(k);
    return oracle::binom_lod(x, 70, x / 70.0, 0.5);
  });
  const double second = oracle::expect_missing(
      20, p, [&](std::uint64_t k) { return oracle::binom_lod(30.0 + static_cast<double>(k), 70, p, 0.5); });
  MCConfig mc;
  mc.n_draws = 10000;
  const auto g = expected_lod_gap(model, obs, 0.5, mc);
  EXPECT_EQ(g.dominance_violations, 0u);
  EXPECT_NEAR(g.at_complete_mle.mean, first, 3 * g.at_complete_mle.standard_error);
  EXPECT_NEAR(g.at_observed_mle.mean, second, 3 * g.at_observed_mle.standard_error);
  EXPECT_NEAR(g.gap.mean, first - second, 3 * g.gap.standard_error);
  EXPECT_GT(first, second);
  EXPECT_GT(g.gap.mean, 3 * g.gap.standard_error);
}
