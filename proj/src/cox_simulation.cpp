#include <cmath>
#include <limits>

#include "relinfo/cox.hpp"
#include "relinfo/error.hpp"

namespace relinfo {

namespace {

// Exponential censoring rate giving the targeted expected censored fraction
// when half the subjects have relative hazard exp(beta).
double censoring_rate_for(const SimulationSpec& spec) {
  const double c = spec.censoring_fraction;
  if (c == 0.0) return 0.0;
  const double h0 = spec.baseline_rate;
  const double h1 = spec.baseline_rate * std::exp(spec.beta);
  auto fraction = [&](double mu) { return 0.5 * (mu / (mu + h0) + mu / (mu + h1)); };
  double lo = 0.0, hi = 1.0;
  while (fraction(hi) < c) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fraction(mid) < c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SimulatedStudy simulate_study(const SimulationSpec& spec, std::uint64_t seed) {
  if (spec.n_subjects < 2) fail(ErrorCode::invalid_argument, "simulation needs at least two subjects");
  if (!(spec.baseline_rate > 0.0)) fail(ErrorCode::invalid_argument, "baseline rate must be positive");
  if (!(spec.censoring_fraction >= 0.0 && spec.censoring_fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "censoring fraction must lie in [0, 1)");
  }
  const double censor_rate = censoring_rate_for(spec);
  DrawRng rng(seed, 0);
  std::vector<SurvivalRecord> censored, uncensored;
  for (std::size_t i = 0; i < spec.n_subjects; ++i) {
    const double z = sample_bernoulli(rng, 0.5) ? 1.0 : 0.0;
    const double t = sample_exponential(rng, spec.baseline_rate * std::exp(spec.beta * z));
    const double c = censor_rate > 0.0 ? sample_exponential(rng, censor_rate) : std::numeric_limits<double>::infinity();
    uncensored.push_back({t, EventStatus::event, {z}});
    censored.push_back(c < t ? SurvivalRecord{c, EventStatus::censored, {z}} : SurvivalRecord{t, EventStatus::event, {z}});
  }
  return {SurvivalDataset(std::move(censored), 1), SurvivalDataset(std::move(uncensored), 1)};
}

DossReplicationSummary doss_replication(const DossReplicationConfig& config) {
  if (config.n_datasets == 0) fail(ErrorCode::invalid_argument, "n_datasets must be positive");
  const std::size_t max_attempts = config.max_attempts ? config.max_attempts : 3 * config.n_datasets;
  DossReplicationSummary summary;
  for (std::size_t attempt = 0; attempt < max_attempts && summary.rows.size() < config.n_datasets; ++attempt) {
    const std::uint64_t dataset_seed = mix_seed(config.ri.mc.seed, attempt);
    const SimulatedStudy study = simulate_study(config.simulation, dataset_seed);
    CoxRiOptions naive_options = config.ri;
    naive_options.mc.seed = mix_seed(dataset_seed, 1);
    CoxRiOptions correct_options = config.ri;
    correct_options.mc.seed = mix_seed(dataset_seed, 2);
    DossReplicationRow row;
    row.dataset_seed = dataset_seed;
    row.censored_fraction = 1.0 - static_cast<double>(study.censored.event_count()) /
                                      static_cast<double>(study.censored.size());
    try {
      row.naive = ri1_cox_naive(study.censored, config.n_new, {}, std::nullopt, naive_options).ri;
      row.correct_uncensored = ri1_cox_correct(study.uncensored, config.n_new, {}, std::nullopt, correct_options).ri;
    } catch (const Error& e) {
      if (e.is_validation()) throw;
      ++summary.skipped;
      continue;
    }
    if (row.naive.estimate > 1.0) ++summary.naive_above_one;
    if (row.correct_uncensored.estimate > 1.0 + 3.0 * row.correct_uncensored.mc_standard_error) {
      ++summary.correct_above_bound;
    }
    summary.rows.push_back(row);
  }
  if (summary.rows.empty()) fail(ErrorCode::estimation_failure, "no simulated dataset could be fitted");
  summary.fraction_naive_above_one =
      static_cast<double>(summary.naive_above_one) / static_cast<double>(summary.rows.size());
  return summary;
}

}  // namespace relinfo
