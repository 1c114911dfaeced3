#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "oracles.hpp"
#include "relinfo/cox.hpp"

using namespace relinfo;

namespace {

SurvivalDataset dataset(const std::vector<oracle::Subject>& s) {
  std::vector<SurvivalRecord> records;
  for (const auto& x : s) records.push_back({x.time, x.event ? EventStatus::event : EventStatus::censored, {x.z}});
  return SurvivalDataset(std::move(records), 1);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

// Small fixtures, all with a finite partial-likelihood maximum.
std::vector<std::vector<oracle::Subject>> fit_fixtures() {
  return {
      {{1, true, 1}, {2, true, 0}, {3, true, 1}, {4, true, 0}, {5, false, 1}, {6, true, 0}},
      {{0.5, true, 0}, {1.2, true, 1}, {1.9, false, 0}, {2.2, true, 1}, {3.1, true, 0}, {4.0, true, 1}},
      {{1, true, 0.3}, {2, true, -1.2}, {2, true, 0.8}, {3, false, 2.0}, {4, true, -0.5}},
      {{2.0, true, 1}, {1.0, true, 0}, {3.5, true, 1}, {0.7, false, 1}, {5.0, true, 0}, {2.8, true, 0},
       {4.1, true, 1}, {6.3, false, 0}},
      {{1, true, 1}, {2, true, 1}, {3, true, 0}, {4, true, 1}, {5, true, 0}, {6, true, 0}, {7, true, 1}},
      {{3, true, 0.5}, {1, true, 1.5}, {4, true, -0.5}, {2, false, 0.0}, {5, true, 1.0}, {6, true, -1.0},
       {7, true, 2.0}},
  };
}

Eigen::VectorXd vec(double b) { return Eigen::VectorXd::Constant(1, b); }

CoxRiOptions ri_options(std::uint64_t draws = 2000) {
  CoxRiOptions o;
  o.mc.n_draws = draws;
  return o;
}

}  // namespace

// ---- partial likelihood and fit ----

TEST(PartialLikelihood, MatchesExplicitProduct) {
  for (const auto& f : fit_fixtures()) {
    const auto rank = extract_rank_data(dataset(f));
    for (double b : {-1.3, 0.0, 0.4, 2.2}) {
      EXPECT_NEAR(partial_loglik(rank, vec(b)), oracle::partial_loglik_1d(f, b), 1e-12);
    }
  }
}

TEST(PartialLikelihood, DerivativesMatchFiniteDifferences) {
  std::vector<SurvivalRecord> recs{{1, EventStatus::event, {0.2, 1}},  {2, EventStatus::event, {-0.4, 0}},
                                   {3, EventStatus::censored, {1.1, 1}}, {4, EventStatus::event, {0.0, 0}},
                                   {5, EventStatus::event, {-1.0, 1}},   {6, EventStatus::event, {0.7, 0}}};
  const auto rank = extract_rank_data(SurvivalDataset(recs, 2));
  Eigen::VectorXd b(2);
  b << 0.3, -0.6;
  const auto d = partial_likelihood_derivatives(rank, b);
  EXPECT_NEAR(d.loglik, partial_loglik(rank, b), 1e-12);
  const double h = 1e-5;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(j) = h;
    const double g = (partial_loglik(rank, b + e) - partial_loglik(rank, b - e)) / (2 * h);
    EXPECT_NEAR(d.gradient(j), g, 1e-7);
    const auto dp = partial_likelihood_derivatives(rank, b + e);
    const auto dm = partial_likelihood_derivatives(rank, b - e);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(d.information(k, j), -(dp.gradient(k) - dm.gradient(k)) / (2 * h), 1e-6);
  }
}

TEST(CoxFit, MatchesGridSearch) {
  for (const auto& f : fit_fixtures()) {
    const auto fit = fit_partial_likelihood(extract_rank_data(dataset(f)));
    const double grid = oracle::grid_argmax([&](double b) { return oracle::partial_loglik_1d(f, b); }, -10, 10);
    EXPECT_NEAR(fit.beta(0), grid, 1e-6);
    EXPECT_GT(fit.se(0), 0.0);
    EXPECT_LE(fit.iterations, 50);
  }
}

TEST(CoxFit, InvariantUnderMonotoneTimeTransform) {
  for (const auto& f : fit_fixtures()) {
    auto g = f;
    for (auto& s : g) s.time = std::log1p(s.time) * 7.0 + std::pow(s.time, 3.0);
    const auto a = fit_partial_likelihood(extract_rank_data(dataset(f)));
    const auto b = fit_partial_likelihood(extract_rank_data(dataset(g)));
    EXPECT_EQ(a.beta(0), b.beta(0));
    EXPECT_EQ(a.se(0), b.se(0));
  }
}

TEST(CoxFit, ConstantCovariateIsRankDeficient) {
  const auto rank = extract_rank_data(dataset({{1, true, 2}, {2, true, 2}, {3, true, 2}}));
  EXPECT_EQ(code_of([&] { fit_partial_likelihood(rank); }), ErrorCode::rank_deficient);
}

TEST(CoxFit, SeparatedDataDiverges) {
  const auto rank =
      extract_rank_data(dataset({{1, true, 1}, {2, true, 1}, {3, true, 1}, {4, true, 0}, {5, true, 0}, {6, true, 0}}));
  EXPECT_EQ(code_of([&] { fit_partial_likelihood(rank); }), ErrorCode::separation);
}

// ---- baseline ----

TEST(Breslow, ZeroCoefficientIsNelsonAalen) {
  const auto d = dataset({{1, true, 1}, {2, false, 0}, {3, true, 1}, {3, true, 0}, {5, true, 1}});
  const auto h = breslow_baseline(d, vec(0.0));
  EXPECT_EQ(h.jump_times(), (std::vector<double>{1, 3, 5}));
  ASSERT_EQ(h.jump_sizes().size(), 3u);
  EXPECT_DOUBLE_EQ(h.jump_sizes()[0], 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(h.jump_sizes()[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.jump_sizes()[2], 1.0 / 1.0);
}

TEST(Breslow, HandComputedIncrements) {
  // Relative hazards exp(ln 2 * z): 2, 1, 2, 1, 2; the third subject is censored.
  const auto d = dataset({{1, true, 1}, {2, true, 0}, {3, false, 1}, {4, true, 0}, {5, true, 1}});
  const auto h = breslow_baseline(d, vec(std::log(2.0)));
  ASSERT_EQ(h.jump_sizes().size(), 4u);
  EXPECT_NEAR(h.jump_sizes()[0], 1.0 / 8.0, 1e-15);
  EXPECT_NEAR(h.jump_sizes()[1], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(h.jump_sizes()[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(h.jump_sizes()[3], 1.0 / 2.0, 1e-15);
  EXPECT_NEAR(h.step(4.5), 1.0 / 8 + 1.0 / 6 + 1.0 / 3, 1e-15);
}

TEST(Breslow, NoEventsGivesEmptyStep) {
  const auto h = breslow_baseline(dataset({{1, false, 1}, {2, false, 0}}), vec(0.3));
  EXPECT_TRUE(h.empty());
  EXPECT_EQ(h.step(10.0), 0.0);
}

TEST(BaselineHazard, SmoothedInverseRoundTrip) {
  const BaselineHazard h({1.0, 2.5, 4.0}, {0.2, 0.5, 0.1});
  EXPECT_NEAR(h.tail_rate(), 0.1 / 1.5, 1e-15);
  for (double t : {0.0, 0.3, 1.0, 1.7, 2.5, 3.9, 4.0, 9.0}) EXPECT_NEAR(h.smoothed_inverse(h.smoothed(t)), t, 1e-12);
  EXPECT_EQ(h.smoothed(1.0), 0.2);
  EXPECT_NEAR(h.smoothed(0.5), 0.1, 1e-15);
  const BaselineHazard tail({1.0}, {0.5}, 2.0);
  EXPECT_NEAR(tail.smoothed(3.0), 0.5 + 4.0, 1e-15);
}

TEST(BaselineHazard, ValidatesJumps) {
  EXPECT_THROW(BaselineHazard({2.0, 1.0}, {0.1, 0.1}), Error);
  EXPECT_THROW(BaselineHazard({1.0}, {0.0}), Error);
  EXPECT_THROW(BaselineHazard({1.0}, {0.1}, -1.0), Error);
}

// ---- rank-conditional sampler ----

namespace {

// Independent model draws T_i = L^-1(E_i / r_i), kept only when their order
// reproduces the conditioning failure order.
std::vector<std::vector<double>> rejection_draws(const RankData& rank, const Eigen::VectorXd& beta,
                                                 const BaselineHazard& h, std::size_t wanted) {
  const std::size_t n = rank.n_subjects();
  std::vector<std::vector<double>> out;
  std::uint64_t stream = 0;
  while (out.size() < wanted) {
    DrawRng rng(777, stream++);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::exp(rank.covariates.row(static_cast<Eigen::Index>(i)).dot(beta));
      t[i] = h.smoothed_inverse(-std::log(rng.uniform()) / r);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    if (order == rank.failure_order) out.push_back(t);
  }
  return out;
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j, int power = 1) {
  std::vector<double> c;
  for (const auto& r : rows) c.push_back(std::pow(r[j], power));
  return c;
}

bool reranks(const std::vector<double>& t, const RankData& rank) {
  for (std::size_t k = 0; k + 1 < rank.n_failures(); ++k) {
    if (!(t[rank.failure_order[k]] < t[rank.failure_order[k + 1]])) return false;
  }
  return true;
}

}  // namespace

TEST(RankSampler, MomentsMatchRejectionSampler) {
  const std::vector<std::vector<oracle::Subject>> fixtures{
      {{1, true, 1}, {2, true, 0}, {3, true, 1}},
      {{0.4, true, 0}, {0.9, true, 1}, {1.3, true, 1}, {2.0, true, 0}},
      {{1, true, 0.5}, {2, true, -1}, {3, true, 1}, {4, true, 0}, {5, true, -0.5}},
  };
  for (const auto& f : fixtures) {
    const auto data = dataset(f);
    const auto rank = extract_rank_data(data);
    const Eigen::VectorXd beta = vec(0.7);
    const auto h = breslow_baseline(data, beta);
    const std::size_t draws = 20000;
    std::vector<std::vector<double>> sampled;
    for (std::size_t i = 0; i < draws; ++i) {
      DrawRng rng(99, i);
      sampled.push_back(sample_times_given_ranks(rank, beta, h, rng));
      ASSERT_TRUE(reranks(sampled.back(), rank));
    }
    const auto reference = rejection_draws(rank, beta, h, draws);
    for (std::size_t j = 0; j < f.size(); ++j) {
      for (int power : {1, 2}) {
        const auto a = oracle::moments(column(sampled, j, power));
        const auto b = oracle::moments(column(reference, j, power));
        EXPECT_TRUE(oracle::within_se(a, b, 4.0)) << "subject " << j << " moment " << power << ": " << a.mean << " vs "
                                             << b.mean;
      }
    }
  }
}

TEST(RankSampler, GapsAreExponentialWithRiskSetRates) {
  // Unit-slope baseline makes the time scale the cumulative-hazard scale.
  const auto rank = extract_rank_data(dataset({{1, true, 0}, {2, true, 0}, {3, true, 0}}));
  const BaselineHazard h({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
  // Six comparisons, so a 4 SE band keeps the family-wise false-failure rate small.
  const std::size_t draws = 40000;
  std::vector<std::vector<double>> gaps(3);
  for (std::size_t i = 0; i < draws; ++i) {
    DrawRng rng(5, i);
    const auto t = sample_times_given_ranks(rank, vec(0.0), h, rng);
    gaps[0].push_back(t[0]);
    gaps[1].push_back(t[1] - t[0]);
    gaps[2].push_back(t[2] - t[1]);
  }
  const double rates[3] = {3.0, 2.0, 1.0};
  for (int k = 0; k < 3; ++k) {
    const auto m = oracle::moments(gaps[k]);
    EXPECT_NEAR(m.mean, 1.0 / rates[k], 4 * m.se());
    // Var of a sample variance of exponentials: (mu4 - sigma^4) / n with mu4 = 9 sigma^4.
    const double sigma2 = 1.0 / (rates[k] * rates[k]);
    EXPECT_NEAR(m.var, sigma2, 4 * sigma2 * std::sqrt(8.0 / draws));
    EXPECT_GT(*std::min_element(gaps[k].begin(), gaps[k].end()), 0.0);
  }
}

TEST(RankSampler, CensoredFixturesRerankAndKeepCensoringTimes) {
  const auto data = dataset({{1, true, 1}, {1.5, false, 0}, {2, true, 0}, {3, false, 1}, {4, true, 1}});
  const auto rank = extract_rank_data(data);
  const auto h = breslow_baseline(data, vec(0.2));
  std::vector<double> censor(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) censor[i] = data[i].time;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    DrawRng rng(8, i);
    const auto t = sample_times_given_ranks(rank, vec(0.2), h, rng, censor);
    ASSERT_TRUE(reranks(t, rank));
    ASSERT_EQ(t[1], 1.5);
    ASSERT_EQ(t[3], 3.0);
    // Censoring pattern preserved: first failure before 1.5, second between 1.5 and 3, last after 3.
    ASSERT_LT(t[0], 1.5);
    ASSERT_GT(t[2], 1.5);
    ASSERT_LT(t[2], 3.0);
    ASSERT_GT(t[4], 3.0);
  }
}

TEST(RankSampler, RequiresCensoringTimesWhenCensored) {
  const auto data = dataset({{1, true, 1}, {2, false, 0}, {3, true, 0}});
  const auto rank = extract_rank_data(data);
  DrawRng rng(1, 0);
  EXPECT_EQ(code_of([&] { sample_times_given_ranks(rank, vec(0.0), breslow_baseline(data, vec(0.0)), rng); }),
            ErrorCode::invalid_argument);
}

// ---- relative information ----

TEST(CoxRi, NaiveWithNoNewSubjectsIsExactlyOne) {
  const auto study = simulate_study(SimulationSpec{}, 3);
  const auto r = ri1_cox_naive(study.censored, 0, {}, std::nullopt, ri_options());
  EXPECT_EQ(r.ri.estimate, 1.0);
  EXPECT_EQ(r.ri.mc_standard_error, 0.0);
}

TEST(CoxRi, CorrectWithNoNewSubjectsIsOneWithinError) {
  const auto study = simulate_study(SimulationSpec{}, 4);
  const auto r = ri1_cox_correct(study.uncensored, 0, {}, std::nullopt, ri_options());
  EXPECT_NEAR(r.ri.estimate, 1.0, 3 * r.ri.mc_standard_error + 1e-15);
  EXPECT_EQ(r.ri.flags & kFlagCensoredRankResampling, 0u);
}

TEST(CoxRi, CorrectOnUncensoredDataStaysInUnitInterval) {
  SimulationSpec spec;
  spec.n_subjects = 30;
  spec.censoring_fraction = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto study = simulate_study(spec, seed);
    const auto r = ri1_cox_correct(study.uncensored, 10, {}, std::nullopt, ri_options()).ri;
    EXPECT_GT(r.estimate, 0.0);
    EXPECT_LE(r.estimate, 1.0 + 3 * r.mc_standard_error);
  }
}

TEST(CoxRi, CorrectOnUncensoredDataIgnoresBaselineScale) {
  SimulationSpec spec;
  spec.censoring_fraction = 0.0;
  const auto study = simulate_study(spec, 6);
  auto opts = ri_options();
  const auto a = ri1_cox_correct(study.uncensored, 5, {}, std::nullopt, opts).ri;
  opts.baseline_scale = 3.7;
  const auto b = ri1_cox_correct(study.uncensored, 5, {}, std::nullopt, opts).ri;
  EXPECT_NEAR(a.estimate, b.estimate, 3 * std::max(a.mc_standard_error, b.mc_standard_error));
}

TEST(CoxRi, NaiveAndCorrectDifferUnderCensoring) {
  SimulationSpec spec;
  spec.n_subjects = 12;
  spec.censoring_fraction = 0.3;
  spec.beta = 1.0;
  const auto study = simulate_study(spec, 22);
  const auto opts = ri_options(4000);
  const auto naive = ri1_cox_naive(study.censored, 5, {}, std::nullopt, opts).ri;
  const auto correct = ri1_cox_correct(study.censored, 5, {}, std::nullopt, opts).ri;
  EXPECT_TRUE(correct.flags & kFlagCensoredRankResampling);
  const double se = std::hypot(naive.mc_standard_error, correct.mc_standard_error);
  EXPECT_GT(std::abs(naive.estimate - correct.estimate), 3 * se);
}

TEST(CoxRi, ExplicitNewCovariates) {
  const auto study = simulate_study(SimulationSpec{}, 7);
  Eigen::MatrixXd z(3, 1);
  z << 1, 0, 1;
  const auto r = ri1_cox_correct(study.uncensored, 3, z, std::nullopt, ri_options()).ri;
  EXPECT_GT(r.estimate, 0.0);
  EXPECT_EQ(code_of([&] { ri1_cox_correct(study.uncensored, 4, z, std::nullopt, ri_options()); }),
            ErrorCode::invalid_argument);
}

TEST(CoxRi, NullAtEstimateIsUndefined) {
  const auto study = simulate_study(SimulationSpec{}, 8);
  const auto fit = fit_partial_likelihood(extract_rank_data(study.uncensored));
  EXPECT_EQ(code_of([&] { ri1_cox_correct(study.uncensored, 3, {}, fit.beta, ri_options()); }),
            ErrorCode::undefined_measure);
}

TEST(CoxRi, WorkerCountDoesNotChangeBits) {
  const auto study = simulate_study(SimulationSpec{}, 9);
  auto opts = ri_options(1000);
  opts.mc.worker_hint = 1;
  const auto a = ri1_cox_correct(study.censored, 5, {}, std::nullopt, opts).ri;
  opts.mc.worker_hint = 4;
  const auto b = ri1_cox_correct(study.censored, 5, {}, std::nullopt, opts).ri;
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.mc_standard_error, b.mc_standard_error);
}

// ---- Wald-type measure ----

TEST(RiW, CompleteEqualsObservedIsOne) { EXPECT_DOUBLE_EQ(ri_w_wald(2.0, 0.5, 2.0, 0.5, 0.0), 1.0); }

TEST(RiW, LargerCompleteVarianceExceedsOne) {
  // Equal means; the complete-data statistic is noisier than the observed one.
  const double r = ri_w_wald(1.5, 0.4, 1.5, 0.6, 0.0);
  EXPECT_GT(r, 1.0);
  EXPECT_NEAR(r, (1.5 * 1.5 / 0.8) / (1.5 * 1.5 / 1.2), 1e-14);
}

TEST(RiW, ObservedAtNullIsZero) { EXPECT_EQ(ri_w_wald(0.3, 0.5, 0.8, 0.2, 0.3), 0.0); }

TEST(RiW, UsualCaseBelowOne) {
  const double r = ri_w_wald(1.0, 0.5, 1.0, 0.25, 0.0);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
}

TEST(RiW, ZeroVarianceIsDomainError) {
  EXPECT_EQ(code_of([] { ri_w_wald(1.0, 0.0, 1.0, 0.5, 0.0); }), ErrorCode::domain);
  EXPECT_EQ(code_of([] { ri_w_wald(1.0, 0.5, 1.0, 0.0, 0.0); }), ErrorCode::domain);
}

// ---- simulation ----

TEST(Simulation, PairedDatasetsShareSubjects) {
  const auto s = simulate_study(SimulationSpec{}, 10);
  ASSERT_EQ(s.censored.size(), 20u);
  EXPECT_EQ(s.uncensored.event_count(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(s.censored[i].covariates, s.uncensored[i].covariates);
    EXPECT_LE(s.censored[i].time, s.uncensored[i].time);
    if (s.censored[i].status == EventStatus::event) EXPECT_EQ(s.censored[i].time, s.uncensored[i].time);
  }
}

TEST(Simulation, CensoringFractionNearTarget) {
  double censored = 0.0, total = 0.0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto s = simulate_study(SimulationSpec{}, seed);
    censored += static_cast<double>(s.censored.size() - s.censored.event_count());
    total += static_cast<double>(s.censored.size());
  }
  const double p = censored / total;
  EXPECT_NEAR(p, 0.2, 3 * std::sqrt(0.2 * 0.8 / total) + 0.01);
}
