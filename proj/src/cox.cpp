#include "relinfo/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "relinfo/error.hpp"

namespace relinfo {

namespace {

Eigen::VectorXd linear_predictor(const RankData& rank, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != rank.covariate_dim()) {
    fail(ErrorCode::invalid_argument, "coefficient dimension does not match the covariates");
  }
  if (!beta.allFinite()) fail(ErrorCode::domain, "coefficients must be finite");
  return rank.covariates * beta;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

double partial_loglik(const RankData& rank, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(rank, beta);
  const double shift = eta.maxCoeff();
  const std::size_t n = rank.n_subjects();
  // suffix[pos] = sum over exit positions >= pos of exp(eta - shift)
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t pos = n; pos-- > 0;) suffix[pos] = suffix[pos + 1] + std::exp(eta(static_cast<Eigen::Index>(rank.exit_order[pos])) - shift);
  double ll = 0.0;
  for (std::size_t k = 0; k < rank.n_failures(); ++k) {
    ll += eta(static_cast<Eigen::Index>(rank.failure_order[k])) - shift - std::log(suffix[rank.risk_set_begin[k]]);
  }
  return ll;
}

PartialLikelihood partial_likelihood_derivatives(const RankData& rank, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = linear_predictor(rank, beta);
  const double shift = eta.maxCoeff();
  const auto p = static_cast<Eigen::Index>(rank.covariate_dim());
  PartialLikelihood out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.information = Eigen::MatrixXd::Zero(p, p);

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  std::size_t pos = rank.n_subjects();
  // risk_set_begin is nondecreasing in k, so sweep failures backwards while
  // growing the suffix sums.
  for (std::size_t k = rank.n_failures(); k-- > 0;) {
    while (pos > rank.risk_set_begin[k]) {
      --pos;
      const auto j = static_cast<Eigen::Index>(rank.exit_order[pos]);
      const double w = std::exp(eta(j) - shift);
      const Eigen::VectorXd z = rank.covariates.row(j).transpose();
      s0 += w;
      s1 += w * z;
      s2.noalias() += w * z * z.transpose();
    }
    const auto f = static_cast<Eigen::Index>(rank.failure_order[k]);
    const Eigen::VectorXd mean = s1 / s0;
    out.loglik += eta(f) - shift - std::log(s0);
    out.gradient += rank.covariates.row(f).transpose() - mean;
    out.information += s2 / s0 - mean * mean.transpose();
  }
  return out;
}

CoxFit fit_partial_likelihood(const RankData& rank, const CoxFitOptions& options) {
  if (rank.n_failures() == 0) fail(ErrorCode::degenerate_data, "no events to fit");
  const auto p = static_cast<Eigen::Index>(rank.covariate_dim());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  PartialLikelihood current = partial_likelihood_derivatives(rank, beta);

  const double scale = std::max(1.0, current.information.trace());
  const double initial_min_eig = min_eigenvalue(current.information);
  if (!(initial_min_eig > 1e-12 * scale)) {
    fail(ErrorCode::rank_deficient,
         "information matrix is singular: covariates do not vary within any risk set in some direction");
  }

  CoxFit fit;
  bool converged = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    fit.iterations = iter;
    if (current.gradient.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      converged = true;
      break;
    }
    if (min_eigenvalue(current.information) < 1e-6 * initial_min_eig) {
      fail(ErrorCode::separation, "monotone partial likelihood: the coefficient estimate diverges");
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(current.information);
    const Eigen::VectorXd step = ldlt.solve(current.gradient);
    double factor = 1.0;
    bool improved = false;
    for (int h = 0; h <= options.max_step_halvings; ++h, factor *= 0.5) {
      const Eigen::VectorXd candidate = beta + factor * step;
      const double ll = partial_loglik(rank, candidate);
      if (ll > current.loglik) {
        beta = candidate;
        current = partial_likelihood_derivatives(rank, beta);
        improved = true;
        break;
      }
    }
    if (!improved) {
      // No representable ascent remains; accept if the gradient is small
      // relative to the curvature.
      converged = current.gradient.cwiseAbs().maxCoeff() < 1e-6;
      break;
    }
  }
  if (!converged && current.gradient.cwiseAbs().maxCoeff() < options.gradient_tolerance) converged = true;
  if (!converged) {
    fail(ErrorCode::separation, "Newton iteration did not converge; the partial likelihood appears monotone");
  }
  if (min_eigenvalue(current.information) < 1e-6 * initial_min_eig) {
    fail(ErrorCode::separation, "monotone partial likelihood: the coefficient estimate diverges");
  }
  fit.beta = beta;
  fit.loglik = current.loglik;
  const Eigen::MatrixXd covariance = current.information.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.se = covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

BaselineHazard::BaselineHazard(std::vector<double> jump_times, std::vector<double> jump_sizes,
                               std::optional<double> tail_rate)
    : jump_times_(std::move(jump_times)), jump_sizes_(std::move(jump_sizes)), tail_rate_(tail_rate) {
  if (jump_times_.size() != jump_sizes_.size()) fail(ErrorCode::invalid_argument, "jump times and sizes differ in length");
  double previous = 0.0, total = 0.0;
  for (std::size_t i = 0; i < jump_times_.size(); ++i) {
    if (!(jump_times_[i] > previous)) fail(ErrorCode::invalid_argument, "jump times must be positive and increasing");
    if (!(jump_sizes_[i] > 0.0) || !std::isfinite(jump_sizes_[i])) {
      fail(ErrorCode::invalid_argument, "jump sizes must be positive and finite");
    }
    previous = jump_times_[i];
    total += jump_sizes_[i];
    cumulative_.push_back(total);
  }
  if (tail_rate_ && !(*tail_rate_ > 0.0)) fail(ErrorCode::invalid_argument, "tail rate must be positive");
}

double BaselineHazard::step(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double BaselineHazard::tail_rate() const {
  if (tail_rate_) return *tail_rate_;
  if (empty()) fail(ErrorCode::degenerate_data, "baseline hazard has no jumps");
  const std::size_t last = jump_times_.size() - 1;
  const double gap = last == 0 ? jump_times_[0] : jump_times_[last] - jump_times_[last - 1];
  return jump_sizes_[last] / gap;
}

double BaselineHazard::smoothed(double t) const {
  if (empty()) fail(ErrorCode::degenerate_data, "baseline hazard has no jumps");
  if (t <= 0.0) return 0.0;
  if (t >= jump_times_.back()) return cumulative_.back() + (t - jump_times_.back()) * tail_rate();
  const auto k = static_cast<std::size_t>(std::upper_bound(jump_times_.begin(), jump_times_.end(), t) - jump_times_.begin());
  const double t0 = k == 0 ? 0.0 : jump_times_[k - 1];
  const double h0 = k == 0 ? 0.0 : cumulative_[k - 1];
  return h0 + (t - t0) * (cumulative_[k] - h0) / (jump_times_[k] - t0);
}

double BaselineHazard::smoothed_inverse(double u) const {
  if (empty()) fail(ErrorCode::degenerate_data, "baseline hazard has no jumps");
  if (u <= 0.0) return 0.0;
  if (u >= cumulative_.back()) return jump_times_.back() + (u - cumulative_.back()) / tail_rate();
  const auto k = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  const double t0 = k == 0 ? 0.0 : jump_times_[k - 1];
  const double h0 = k == 0 ? 0.0 : cumulative_[k - 1];
  return t0 + (u - h0) * (jump_times_[k] - t0) / (cumulative_[k] - h0);
}

BaselineHazard BaselineHazard::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) fail(ErrorCode::invalid_argument, "scale factor must be positive");
  std::vector<double> sizes = jump_sizes_;
  for (double& s : sizes) s *= factor;
  std::optional<double> tail;
  if (tail_rate_) tail = *tail_rate_ * factor;
  return BaselineHazard(jump_times_, std::move(sizes), tail);
}

BaselineHazard breslow_baseline(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != data.covariate_dim()) {
    fail(ErrorCode::invalid_argument, "coefficient dimension does not match the covariates");
  }
  if (!beta.allFinite()) fail(ErrorCode::domain, "coefficients must be finite");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a].time < data[b].time; });
  const Eigen::VectorXd eta = data.covariate_matrix() * beta;

  std::vector<double> times, sizes;
  double at_risk = 0.0;
  std::size_t pos = n;
  // Sweep distinct times from the largest down, accumulating the risk sum.
  std::vector<std::pair<double, double>> jumps;  // (time, deaths)
  while (pos > 0) {
    std::size_t start = pos - 1;
    while (start > 0 && data[order[start - 1]].time == data[order[pos - 1]].time) --start;
    double deaths = 0.0;
    for (std::size_t q = start; q < pos; ++q) {
      at_risk += std::exp(eta(static_cast<Eigen::Index>(order[q])));
      if (data[order[q]].status == EventStatus::event) deaths += 1.0;
    }
    if (deaths > 0.0) {
      if (!(at_risk > 0.0) || !std::isfinite(at_risk)) {
        fail(ErrorCode::data_integrity, "empty or non-finite risk set at an event time");
      }
      jumps.emplace_back(data[order[start]].time, deaths / at_risk);
    }
    pos = start;
  }
  std::reverse(jumps.begin(), jumps.end());
  for (const auto& [t, d] : jumps) {
    times.push_back(t);
    sizes.push_back(d);
  }
  return BaselineHazard(std::move(times), std::move(sizes));
}

std::vector<double> sample_times_given_ranks(const RankData& rank, const Eigen::VectorXd& beta,
                                             const BaselineHazard& baseline, DrawRng& rng,
                                             std::span<const double> censor_times) {
  const std::size_t n = rank.n_subjects();
  const Eigen::VectorXd eta = linear_predictor(rank, beta);
  const bool any_censored = rank.n_failures() < n;
  if (any_censored && censor_times.size() != n) {
    fail(ErrorCode::invalid_argument, "censoring times are required for every subject when the ranks include censoring");
  }

  // suffix_rate[pos]: summed relative hazard of subjects at exit positions >= pos.
  std::vector<double> suffix_rate(n + 1, 0.0);
  for (std::size_t pos = n; pos-- > 0;) {
    suffix_rate[pos] = suffix_rate[pos + 1] + std::exp(eta(static_cast<Eigen::Index>(rank.exit_order[pos])));
  }
  // Cumulative-hazard value of the next censoring at or after each position.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> next_censor(n + 1, kInf);
  for (std::size_t pos = n; pos-- > 0;) {
    next_censor[pos] = rank.exit_is_event[pos] ? next_censor[pos + 1]
                                               : baseline.smoothed(censor_times[rank.exit_order[pos]]);
  }

  std::vector<double> times(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (!rank.exit_is_event[pos]) times[rank.exit_order[pos]] = censor_times[rank.exit_order[pos]];
  }

  double u_prev = 0.0;
  std::size_t prev_pos = 0;
  for (std::size_t k = 0; k < rank.n_failures(); ++k) {
    const std::size_t pos = rank.failure_position[k];
    double lower = u_prev;
    for (std::size_t q = (k == 0 ? 0 : prev_pos + 1); q < pos; ++q) {
      if (!rank.exit_is_event[q]) lower = std::max(lower, baseline.smoothed(censor_times[rank.exit_order[q]]));
    }
    const double upper = next_censor[pos + 1];
    const double rate = suffix_rate[pos];
    if (!(rate > 0.0) || !std::isfinite(rate)) fail(ErrorCode::data_integrity, "non-finite risk-set hazard");
    if (!(upper > lower)) fail(ErrorCode::data_integrity, "censoring pattern leaves no room for a failure");
    const double u = lower + sample_truncated_exponential(rng, rate, upper - lower);
    times[rank.failure_order[k]] = baseline.smoothed_inverse(u);
    u_prev = u;
    prev_pos = pos;
  }
  return times;
}

const char* to_string(Conditioning c) noexcept {
  return c == Conditioning::rank_data ? "rank_data" : "censored_data";
}

CoxRiResult ri1_cox(Conditioning conditioning, const SurvivalDataset& input, std::size_t n_new,
                    const Eigen::MatrixXd& new_covariates, std::optional<Eigen::VectorXd> beta_null,
                    const CoxRiOptions& options) {
  options.mc.validate();
  const SurvivalDataset data = options.ties == TieMode::jitter ? jitter_ties(input) : input;
  const std::size_t n = data.size();
  const auto p = static_cast<Eigen::Index>(data.covariate_dim());

  const RankData rank = extract_rank_data(data);
  CoxRiResult out;
  out.fit = fit_partial_likelihood(rank, options.fit);
  const Eigen::VectorXd beta_hat = out.fit.beta;
  out.beta_null = beta_null.value_or(Eigen::VectorXd::Zero(p));
  if (out.beta_null.size() != p) fail(ErrorCode::invalid_argument, "null coefficient dimension mismatch");

  const double numerator = partial_loglik(rank, beta_hat) - partial_loglik(rank, out.beta_null);
  detail::require_positive_lod(numerator);

  BaselineHazard baseline = breslow_baseline(data, beta_hat);
  if (options.tail_rate) baseline = BaselineHazard(baseline.jump_times(), baseline.jump_sizes(), options.tail_rate);
  if (options.baseline_scale != 1.0) baseline = baseline.scaled(options.baseline_scale);

  Eigen::MatrixXd z_new(static_cast<Eigen::Index>(n_new), p);
  if (new_covariates.rows() == 0) {
    const Eigen::MatrixXd z = data.covariate_matrix();
    for (std::size_t i = 0; i < n_new; ++i) z_new.row(static_cast<Eigen::Index>(i)) = z.row(static_cast<Eigen::Index>(i % n));
  } else {
    if (static_cast<std::size_t>(new_covariates.rows()) != n_new || new_covariates.cols() != p) {
      fail(ErrorCode::invalid_argument, "new covariates must have n_new rows and one column per covariate");
    }
    z_new = new_covariates;
  }
  if (!(options.new_censoring_rate >= 0.0) || !std::isfinite(options.new_censoring_rate)) {
    fail(ErrorCode::invalid_argument, "new-subject censoring rate must be nonnegative");
  }

  Eigen::MatrixXd z_aug(static_cast<Eigen::Index>(n + n_new), p);
  z_aug.topRows(static_cast<Eigen::Index>(n)) = data.covariate_matrix();
  z_aug.bottomRows(static_cast<Eigen::Index>(n_new)) = z_new;
  const Eigen::VectorXd new_rates = (z_new * beta_hat).array().exp().matrix();

  std::vector<double> observed_times(n), censor_times(n);
  std::vector<unsigned char> observed_events(n);
  bool any_censored = false;
  for (std::size_t i = 0; i < n; ++i) {
    observed_times[i] = data[i].time;
    observed_events[i] = data[i].status == EventStatus::event ? 1 : 0;
    censor_times[i] = data[i].time;
    any_censored = any_censored || !observed_events[i];
  }

  const auto values = mc_map(options.mc, [&](std::uint64_t, DrawRng& rng) {
    std::vector<double> times(n + n_new);
    std::vector<unsigned char> events(n + n_new);
    if (conditioning == Conditioning::rank_data) {
      const std::vector<double> resampled = sample_times_given_ranks(rank, beta_hat, baseline, rng, censor_times);
      std::copy(resampled.begin(), resampled.end(), times.begin());
    } else {
      std::copy(observed_times.begin(), observed_times.end(), times.begin());
    }
    std::copy(observed_events.begin(), observed_events.end(), events.begin());
    for (std::size_t j = 0; j < n_new; ++j) {
      double t = baseline.smoothed_inverse(sample_exponential(rng, 1.0) / new_rates(static_cast<Eigen::Index>(j)));
      unsigned char ev = 1;
      if (options.new_censoring_rate > 0.0) {
        const double c = sample_exponential(rng, options.new_censoring_rate);
        if (c < t) {
          t = c;
          ev = 0;
        }
      }
      times[n + j] = t;
      events[n + j] = ev;
    }
    const RankData augmented = extract_rank_data(times, events, z_aug);
    return partial_loglik(augmented, beta_hat) - partial_loglik(augmented, out.beta_null);
  });

  const MCEstimate expected = summarize_mean(values);
  if (!(expected.mean > 0.0)) {
    fail(ErrorCode::instability, "expected augmented partial-likelihood lod is not positive (mean " +
                                     std::to_string(expected.mean) + ")");
  }
  RelInfoResult& ri = out.ri;
  ri.numerator = numerator;
  ri.denominator = expected.mean;
  ri.estimate = numerator / expected.mean;
  ri.mc_standard_error = detail::ratio_se(numerator, expected);
  ri.n_draws = expected.n_draws();
  ri.sentinel_count = expected.sentinel_count;
  ri.seed = options.mc.seed;
  ri.method = Method::monte_carlo;
  ri.flags = kFlagDeltaMethodSE;
  if (conditioning == Conditioning::rank_data && any_censored) ri.flags |= kFlagCensoredRankResampling;
  return out;
}

CoxRiResult ri1_cox_correct(const SurvivalDataset& data, std::size_t n_new, const Eigen::MatrixXd& new_covariates,
                            std::optional<Eigen::VectorXd> beta_null, const CoxRiOptions& options) {
  return ri1_cox(Conditioning::rank_data, data, n_new, new_covariates, std::move(beta_null), options);
}

CoxRiResult ri1_cox_naive(const SurvivalDataset& data, std::size_t n_new, const Eigen::MatrixXd& new_covariates,
                          std::optional<Eigen::VectorXd> beta_null, const CoxRiOptions& options) {
  return ri1_cox(Conditioning::censored_data, data, n_new, new_covariates, std::move(beta_null), options);
}

double ri_w_wald(double observed_stat, double observed_var, double complete_stat_mean, double complete_stat_var,
                 double theta_null) {
  for (double v : {observed_stat, observed_var, complete_stat_mean, complete_stat_var, theta_null}) {
    if (!std::isfinite(v)) fail(ErrorCode::domain, "ri_w inputs must be finite");
  }
  if (!(observed_var > 0.0) || !(complete_stat_var > 0.0)) {
    fail(ErrorCode::domain, "test-statistic variances must be positive");
  }
  const double observed_lod = (observed_stat - theta_null) * (observed_stat - theta_null) / (2.0 * observed_var);
  const double conditional_var =
      std::max(0.0, complete_stat_var * (observed_var - complete_stat_var) / observed_var);
  const double shift = complete_stat_mean - theta_null;
  const double expected_complete_lod = (conditional_var + shift * shift) / (2.0 * complete_stat_var);
  if (observed_lod == 0.0) return 0.0;
  if (!(expected_complete_lod > 0.0)) {
    fail(ErrorCode::undefined_measure, "expected complete-data lod is zero");
  }
  return observed_lod / expected_complete_lod;
}

}  // namespace relinfo
