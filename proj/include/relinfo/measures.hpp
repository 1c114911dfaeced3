#pragma once

// Model-agnostic lod scores and relative-information measures.
//
// A model plugs in by satisfying MissingDataModel: it names its parameter,
// observed-data and complete-data types, evaluates log-likelihoods on both,
// maximizes them, and draws a completion of the observed data at a given
// parameter. Models whose complete-data likelihood is an exponential family
// additionally satisfy ExponentialFamilyModel, which unlocks the exact
// sufficient-statistic route for conditional expectations of lod scores.
//
// All lod scores are natural-log likelihood ratios.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "relinfo/error.hpp"
#include "relinfo/mc_engine.hpp"

namespace relinfo {

template <class M>
concept MissingDataModel = requires(const M& model, const typename M::Parameter& theta,
                                    const typename M::Observed& observed, const typename M::Complete& complete,
                                    DrawRng& rng) {
  { model.log_likelihood(theta, observed) } -> std::convertible_to<double>;
  { model.log_likelihood(theta, complete) } -> std::convertible_to<double>;
  { model.mle(observed) } -> std::convertible_to<typename M::Parameter>;
  { model.mle(complete) } -> std::convertible_to<typename M::Parameter>;
  { model.draw_completion(observed, theta, rng) } -> std::same_as<typename M::Complete>;
  { model.reduce(complete) } -> std::same_as<typename M::Observed>;
  { model.in_domain(theta) } -> std::same_as<bool>;
  { model.is_interior(theta) } -> std::same_as<bool>;
};

template <class M>
concept ExponentialFamilyModel =
    MissingDataModel<M> && requires(const M& model, const typename M::Parameter& theta,
                                    const typename M::Observed& observed, const typename M::Complete& complete,
                                    const typename M::Sufficient& stat) {
      { model.sufficient_statistic(complete) } -> std::same_as<typename M::Sufficient>;
      // E[T(Y_co) | Y_ob; theta]
      { model.impute_sufficient(observed, theta) } -> std::same_as<typename M::Sufficient>;
      { model.log_likelihood(theta, stat) } -> std::convertible_to<double>;
      { model.mle(stat) } -> std::convertible_to<typename M::Parameter>;
    };

template <class P>
struct HypothesisPair {
  P null_value;
  P alt_value;
};

template <MissingDataModel M>
HypothesisPair<typename M::Parameter> make_hypothesis_pair(const M& model, typename M::Parameter null_value,
                                                           typename M::Parameter alt_value) {
  if (!model.in_domain(null_value) || !model.in_domain(alt_value)) {
    fail(ErrorCode::domain, "hypothesis values must lie in the parameter domain");
  }
  return {std::move(null_value), std::move(alt_value)};
}

enum class Method { closed_form, sufficient_stat_imputation, monte_carlo };

const char* to_string(Method method) noexcept;

// Result flags, reported alongside the estimate.
inline constexpr std::uint32_t kFlagNullImputationOrientation = 1u << 0;  // ri0 reported as lod_imp / lod_ob
inline constexpr std::uint32_t kFlagDeltaMethodSE = 1u << 1;              // ratio SE by the delta method
inline constexpr std::uint32_t kFlagCensoredRankResampling = 1u << 2;     // censoring times held fixed

struct RelInfoResult {
  double estimate = 0.0;
  double mc_standard_error = 0.0;
  std::uint64_t n_draws = 0;
  std::uint64_t seed = 0;
  Method method = Method::closed_form;
  std::uint64_t sentinel_count = 0;
  std::uint32_t flags = 0;
  double numerator = 0.0;    // observed-data lod
  double denominator = 0.0;  // (expected) complete-data lod, or its variance
};

/// How the conditional expectation of the complete-data lod is evaluated.
enum class ExpectationRoute {
  automatic,   // imputation for exponential families, Monte Carlo otherwise
  imputation,
  monte_carlo,
};

struct Ri1Options {
  ExpectationRoute route = ExpectationRoute::automatic;
  MCConfig mc;
};

namespace detail {

inline double checked_lod(double ll_alt, double ll_null) {
  if (std::isnan(ll_alt) || std::isnan(ll_null) || ll_alt == -std::numeric_limits<double>::infinity() ||
      ll_null == -std::numeric_limits<double>::infinity()) {
    fail(ErrorCode::domain, "log-likelihood is -inf at a hypothesis value on the domain boundary");
  }
  return ll_alt - ll_null;
}

template <MissingDataModel M>
typename M::Parameter interior_mle(const M& model, const typename M::Observed& observed) {
  auto theta = model.mle(observed);
  if (!model.is_interior(theta)) {
    fail(ErrorCode::boundary, "observed-data MLE lies on the boundary of the parameter domain");
  }
  return theta;
}

template <MissingDataModel M>
void require_domain(const M& model, const typename M::Parameter& theta) {
  if (!model.in_domain(theta)) fail(ErrorCode::domain, "parameter outside the model domain");
}

inline void require_positive_lod(double lod) {
  if (lod == 0.0) {
    fail(ErrorCode::undefined_measure, "observed lod is zero (MLE equals the null value); measure undefined");
  }
  if (!(lod > 0.0)) {
    fail(ErrorCode::undefined_measure, "observed lod is negative at this hypothesis pair; measure undefined");
  }
}

inline double ratio_se(double numerator, const MCEstimate& denominator) {
  return std::abs(numerator) * denominator.standard_error / (denominator.mean * denominator.mean);
}

}  // namespace detail

/// log L(alt | data) - log L(null | data).
template <MissingDataModel M, class Data>
double lod(const M& model, const HypothesisPair<typename M::Parameter>& pair, const Data& data) {
  detail::require_domain(model, pair.null_value);
  detail::require_domain(model, pair.alt_value);
  return detail::checked_lod(model.log_likelihood(pair.alt_value, data), model.log_likelihood(pair.null_value, data));
}

/// RI1 at a fixed pair, with the conditional expectation taken at `expectation_at`:
///   lod(pair | Y_ob) / E[lod(pair | Y_co) | Y_ob; expectation_at].
template <MissingDataModel M>
RelInfoResult ri1_at(const M& model, const typename M::Observed& observed,
                     const HypothesisPair<typename M::Parameter>& pair,
                     const typename M::Parameter& expectation_at, const Ri1Options& options = {}) {
  detail::require_domain(model, expectation_at);
  const double numerator = lod(model, pair, observed);
  detail::require_positive_lod(numerator);

  RelInfoResult result;
  result.numerator = numerator;
  result.seed = options.mc.seed;

  bool use_imputation = options.route == ExpectationRoute::imputation;
  if (options.route == ExpectationRoute::automatic) use_imputation = ExponentialFamilyModel<M>;

  if (use_imputation) {
    if constexpr (ExponentialFamilyModel<M>) {
      // lod is linear in the sufficient statistic, so imputing the statistic
      // gives the conditional expectation exactly.
      const auto stat = model.impute_sufficient(observed, expectation_at);
      result.denominator = lod(model, pair, stat);
      result.method = Method::sufficient_stat_imputation;
      result.seed = 0;
    } else {
      fail(ErrorCode::unsupported, "sufficient-statistic imputation requires an exponential-family model");
    }
  } else {
    const MCEstimate expected = mc_expectation(
        [&](DrawRng& rng) { return model.draw_completion(observed, expectation_at, rng); },
        [&](const typename M::Complete& complete) { return lod(model, pair, complete); }, options.mc);
    if (!(expected.mean > 0.0)) {
      std::ostringstream msg;
      msg << "Monte Carlo estimate of the expected complete-data lod is not positive (mean " << expected.mean
          << ", SE " << expected.standard_error << ", " << expected.n_effective << " draws)";
      fail(ErrorCode::instability, msg.str());
    }
    result.denominator = expected.mean;
    result.mc_standard_error = detail::ratio_se(numerator, expected);
    result.n_draws = expected.n_draws();
    result.sentinel_count = expected.sentinel_count;
    result.method = Method::monte_carlo;
    result.flags |= kFlagDeltaMethodSE;
  }
  result.estimate = numerator / result.denominator;
  return result;
}

/// RI1 with the alternative and the expectation both at the observed-data MLE.
template <MissingDataModel M>
RelInfoResult ri1(const M& model, const typename M::Observed& observed, const typename M::Parameter& theta_null,
                  const Ri1Options& options = {}) {
  detail::require_domain(model, theta_null);
  const auto theta_ob = detail::interior_mle(model, observed);
  return ri1_at(model, observed, HypothesisPair<typename M::Parameter>{theta_null, theta_ob}, theta_ob, options);
}

/// RI0: impute the complete-data sufficient statistic under the null, treat it
/// as data, and compare its lod (at the pseudo-data MLE) with the observed lod.
/// Reported as lod_imputed / lod_observed so that it lies in (0, 1].
template <MissingDataModel M>
RelInfoResult ri0(const M& model, const typename M::Observed& observed, const typename M::Parameter& theta_null) {
  if constexpr (!ExponentialFamilyModel<M>) {
    fail(ErrorCode::unsupported, "ri0 is defined only for exponential-family models");
  } else {
    detail::require_domain(model, theta_null);
    const auto theta_ob = detail::interior_mle(model, observed);
    const double observed_lod = lod(model, HypothesisPair<typename M::Parameter>{theta_null, theta_ob}, observed);
    detail::require_positive_lod(observed_lod);
    const auto stat = model.impute_sufficient(observed, theta_null);
    const auto theta_imp = model.mle(stat);
    RelInfoResult result;
    result.numerator = observed_lod;
    result.denominator = lod(model, HypothesisPair<typename M::Parameter>{theta_null, theta_imp}, stat);
    result.estimate = result.denominator / observed_lod;
    result.method = Method::sufficient_stat_imputation;
    result.flags |= kFlagNullImputationOrientation;
    return result;
  }
}

struct RiYOptions {
  MCConfig mc;
  // |lod(pair | Y_co)| at or below this makes the sample an infinity sentinel.
  double zero_lod_threshold = 0.0;
};

struct RiYSamples {
  std::vector<double> samples;  // lod(pair | Y_ob) / lod(pair | Y_co), +inf for sentinels
  std::uint64_t sentinel_count = 0;
  double observed_lod = 0.0;
  std::uint64_t seed = 0;
};

/// Per-draw ratios of observed to complete-data lod at a fixed pair, with the
/// missing data drawn at the observed-data MLE.
template <MissingDataModel M>
RiYSamples ri_y_samples(const M& model, const typename M::Observed& observed,
                        const HypothesisPair<typename M::Parameter>& pair, const RiYOptions& options = {}) {
  options.mc.validate(false);
  const auto theta_ob = detail::interior_mle(model, observed);
  RiYSamples out;
  out.seed = options.mc.seed;
  out.observed_lod = lod(model, pair, observed);
  out.samples = mc_map(options.mc, [&](std::uint64_t, DrawRng& rng) {
    const auto complete = model.draw_completion(observed, theta_ob, rng);
    const double complete_lod = lod(model, pair, complete);
    if (std::abs(complete_lod) <= options.zero_lod_threshold) return std::numeric_limits<double>::infinity();
    return out.observed_lod / complete_lod;
  });
  for (double s : out.samples) {
    if (!std::isfinite(s)) ++out.sentinel_count;
  }
  return out;
}

/// Mean of 1/RIy over the non-sentinel samples; estimates 1/RI1 at the same pair.
MCEstimate reciprocal_mean(const RiYSamples& samples);

/// Sample standard deviation of the non-sentinel RIy values.
double ri_y_spread(const RiYSamples& samples);

/// Var[lod(theta_co, theta_null | Y_co) | Y_ob; theta_ob] / lod(theta_ob, theta_null | Y_ob)^2,
/// with theta_co recomputed as the MLE of each completed data set.
template <MissingDataModel M>
RelInfoResult lod_ratio_variance(const M& model, const typename M::Observed& observed,
                                 const typename M::Parameter& theta_null, const MCConfig& mc) {
  detail::require_domain(model, theta_null);
  const auto theta_ob = detail::interior_mle(model, observed);
  const double observed_lod = lod(model, HypothesisPair<typename M::Parameter>{theta_null, theta_ob}, observed);
  detail::require_positive_lod(observed_lod);
  const MCEstimate var = mc_variance(
      [&](DrawRng& rng) { return model.draw_completion(observed, theta_ob, rng); },
      [&](const typename M::Complete& complete) {
        return lod(model, HypothesisPair<typename M::Parameter>{theta_null, model.mle(complete)}, complete);
      },
      mc);
  RelInfoResult result;
  const double scale = observed_lod * observed_lod;
  result.numerator = observed_lod;
  result.denominator = var.mean;
  result.estimate = var.mean / scale;
  result.mc_standard_error = var.standard_error / scale;
  result.n_draws = var.n_draws();
  result.sentinel_count = var.sentinel_count;
  result.seed = mc.seed;
  result.method = Method::monte_carlo;
  return result;
}

struct LodGap {
  MCEstimate at_complete_mle;  // E[lod(theta_co, theta_null | Y_co)]
  MCEstimate at_observed_mle;  // E[lod(theta_ob, theta_null | Y_co)]
  MCEstimate gap;              // paired difference of the two
  std::uint64_t dominance_violations = 0;
  double observed_lod = 0.0;
};

/// Both sides of the expected-lod non-identity, over shared completions.
template <MissingDataModel M>
LodGap expected_lod_gap(const M& model, const typename M::Observed& observed,
                        const typename M::Parameter& theta_null, const MCConfig& mc) {
  mc.validate();
  detail::require_domain(model, theta_null);
  const auto theta_ob = detail::interior_mle(model, observed);
  LodGap out;
  out.observed_lod = lod(model, HypothesisPair<typename M::Parameter>{theta_null, theta_ob}, observed);
  detail::require_positive_lod(out.observed_lod);

  struct PairValue {
    double at_complete = 0.0;
    double at_observed = 0.0;
  };
  const auto values = mc_map(mc, [&](std::uint64_t, DrawRng& rng) {
    const auto complete = model.draw_completion(observed, theta_ob, rng);
    PairValue v;
    v.at_complete = lod(model, HypothesisPair<typename M::Parameter>{theta_null, model.mle(complete)}, complete);
    v.at_observed = lod(model, HypothesisPair<typename M::Parameter>{theta_null, theta_ob}, complete);
    return v;
  });
  std::vector<double> a(values.size()), b(values.size()), d(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    a[i] = values[i].at_complete;
    b[i] = values[i].at_observed;
    d[i] = a[i] - b[i];
    // MLE maximality up to rounding in the two likelihood evaluations.
    if (d[i] < -1e-12 * (1.0 + std::abs(a[i]))) ++out.dominance_violations;
  }
  out.at_complete_mle = summarize_mean(a);
  out.at_observed_mle = summarize_mean(b);
  out.gap = summarize_mean(d);
  return out;
}

}  // namespace relinfo
