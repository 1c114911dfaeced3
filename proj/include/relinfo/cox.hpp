#pragma once

// Cox proportional hazards: partial-likelihood fitting, the Breslow baseline,
// rank-conditional resampling, and relative information for augmenting a study
// with new subjects under two choices of conditioning data.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relinfo/measures.hpp"
#include "relinfo/survival.hpp"

namespace relinfo {

/// Breslow-approximation partial log-likelihood, gradient and information.
struct PartialLikelihood {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;
};

double partial_loglik(const RankData& rank, const Eigen::VectorXd& beta);
PartialLikelihood partial_likelihood_derivatives(const RankData& rank, const Eigen::VectorXd& beta);

struct CoxFitOptions {
  int max_iterations = 50;
  double gradient_tolerance = 1e-8;
  int max_step_halvings = 40;
};

struct CoxFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double loglik = 0.0;
  int iterations = 0;
};

/// Damped Newton maximization of the partial likelihood: each step is halved
/// until the log-likelihood increases. Throws rank_deficient when the
/// information is singular at zero (no covariate variation within any risk
/// set) and separation when the likelihood is monotone (estimate diverges).
CoxFit fit_partial_likelihood(const RankData& rank, const CoxFitOptions& options = {});

/// Cumulative baseline hazard as a step function with positive jumps.
///
/// Simulation needs an invertible version, so smoothed() interpolates linearly
/// through (0, 0) and the jump points and continues past the last jump with
/// the slope of the final segment (last increment over last gap) unless a tail
/// rate is set explicitly.
class BaselineHazard {
 public:
  BaselineHazard() = default;
  BaselineHazard(std::vector<double> jump_times, std::vector<double> jump_sizes,
                 std::optional<double> tail_rate = std::nullopt);

  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<double>& jump_sizes() const { return jump_sizes_; }
  bool empty() const { return jump_times_.empty(); }

  double step(double t) const;
  double smoothed(double t) const;
  double smoothed_inverse(double u) const;
  double tail_rate() const;

  /// Every increment multiplied by factor > 0.
  BaselineHazard scaled(double factor) const;

 private:
  std::vector<double> jump_times_;
  std::vector<double> jump_sizes_;
  std::vector<double> cumulative_;
  std::optional<double> tail_rate_;
};

/// Jump at each distinct event time t of d(t) / sum_{time_j >= t} exp(beta . z_j).
BaselineHazard breslow_baseline(const SurvivalDataset& data, const Eigen::VectorXd& beta);

/// Draws failure times that reproduce the failure order of `rank`.
///
/// On the cumulative-hazard scale the k-th gap is exponential with rate equal
/// to the summed relative hazards still at risk, and the identity of the k-th
/// failure is the observed one. Censored subjects keep the times given in
/// `censor_times` (indexed by subject; required when rank has censored
/// subjects), and each failure is confined between the neighbouring censoring
/// times so the censoring pattern is preserved. Without censoring this is the
/// exact conditional law of the times given the ranks.
std::vector<double> sample_times_given_ranks(const RankData& rank, const Eigen::VectorXd& beta,
                                             const BaselineHazard& baseline, DrawRng& rng,
                                             std::span<const double> censor_times = {});

enum class Conditioning {
  rank_data,      // condition on the partial data; existing times resampled given ranks
  censored_data,  // condition on the censored data; existing times held fixed
};

const char* to_string(Conditioning c) noexcept;

struct CoxRiOptions {
  MCConfig mc{2000};
  TieMode ties = TieMode::breslow;
  // Rate of independent exponential censoring for the new subjects; 0 = none.
  double new_censoring_rate = 0.0;
  std::optional<double> tail_rate;
  // Multiplies the estimated baseline (no effect on the result without censoring).
  double baseline_scale = 1.0;
  CoxFitOptions fit;
};

struct CoxRiResult {
  RelInfoResult ri;
  CoxFit fit;
  Eigen::VectorXd beta_null;
};

/// RI1 for adding n_new subjects, conditioning on the partial data (the
/// conditioning that matches the data the partial likelihood uses). The
/// baseline enters only through the Breslow estimate used to place the times.
/// new_covariates holds n_new rows; when empty, subject i takes the covariates
/// of existing record i mod n. beta_null defaults to zero.
CoxRiResult ri1_cox_correct(const SurvivalDataset& data, std::size_t n_new, const Eigen::MatrixXd& new_covariates,
                            std::optional<Eigen::VectorXd> beta_null, const CoxRiOptions& options = {});

/// As ri1_cox_correct, but conditioning on the censored data: the existing
/// subjects keep their observed times and only the new subjects are simulated.
/// The result may exceed 1.
CoxRiResult ri1_cox_naive(const SurvivalDataset& data, std::size_t n_new, const Eigen::MatrixXd& new_covariates,
                          std::optional<Eigen::VectorXd> beta_null, const CoxRiOptions& options = {});

CoxRiResult ri1_cox(Conditioning conditioning, const SurvivalDataset& data, std::size_t n_new,
                    const Eigen::MatrixXd& new_covariates, std::optional<Eigen::VectorXd> beta_null,
                    const CoxRiOptions& options = {});

/// Relative information of two test statistics, each associated with a normal
/// model with known variance so that the likelihood-ratio test is the Wald test.
///
/// Normal lod of an estimate s with variance V: (s - theta_null)^2 / (2 V).
/// Denominator: E[(S_co - theta_null)^2] / (2 V_co) with
///   E[(S_co - theta_null)^2] = Var(S_co | observed) + (complete_stat_mean - theta_null)^2,
/// where the conditional variance is the coherent normal-model value
///   V_co (V_ob - V_co) / V_ob, floored at 0 when V_co > V_ob (no coherent
///   model exists and the ratio can exceed 1).
double ri_w_wald(double observed_stat, double observed_var, double complete_stat_mean, double complete_stat_var,
                 double theta_null);

/// Simulated study: one binary covariate, exponential failure times, optional
/// exponential censoring.
struct SimulationSpec {
  std::size_t n_subjects = 20;
  double beta = 0.5;
  double baseline_rate = 1.0;
  double censoring_fraction = 0.2;  // targeted expected fraction
};

struct SimulatedStudy {
  SurvivalDataset censored;
  SurvivalDataset uncensored;  // same subjects, true failure times
};

SimulatedStudy simulate_study(const SimulationSpec& spec, std::uint64_t seed);

struct DossReplicationConfig {
  std::size_t n_datasets = 100;
  SimulationSpec simulation;
  std::size_t n_new = 5;
  CoxRiOptions ri;               // ri.mc.n_draws applies per dataset
  std::size_t max_attempts = 0;  // 0 = 3 * n_datasets
};

struct DossReplicationRow {
  std::uint64_t dataset_seed = 0;
  double censored_fraction = 0.0;
  RelInfoResult naive;                // censored data, censored-data conditioning
  RelInfoResult correct_uncensored;   // uncensored variant, rank-data conditioning
};

struct DossReplicationSummary {
  std::vector<DossReplicationRow> rows;
  std::size_t skipped = 0;  // datasets whose fit failed (separation etc.)
  double fraction_naive_above_one = 0.0;
  std::size_t naive_above_one = 0;
  std::size_t correct_above_bound = 0;  // correct RI1 > 1 + 3 SE
};

/// Paired naive/correct Cox study over simulated datasets.
DossReplicationSummary doss_replication(const DossReplicationConfig& config);

}  // namespace relinfo
