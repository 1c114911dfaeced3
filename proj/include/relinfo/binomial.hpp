#pragma once

// Binomial observations with a known number of additional (missing) trials.
// The missing trials are exchangeable with the observed ones and missing
// independently of their outcome.

#include <cstdint>
#include <functional>

#include "relinfo/measures.hpp"
#include "relinfo/rng.hpp"

namespace relinfo {

struct BinomialObserved {
  std::uint64_t successes = 0;
  std::uint64_t n_observed = 1;
  std::uint64_t n_missing = 0;

  void validate() const;
};

struct BinomialComplete {
  BinomialObserved observed;
  std::uint64_t missing_successes = 0;

  std::uint64_t successes_total() const { return observed.successes + missing_successes; }
  std::uint64_t n_total() const { return observed.n_observed + observed.n_missing; }
};

/// Complete-data sufficient statistic; real-valued so it can hold an imputed
/// (expected) success count.
struct BinomialSufficient {
  double successes = 0.0;
  double trials = 0.0;
};

class BinomialModel {
 public:
  using Parameter = double;
  using Observed = BinomialObserved;
  using Complete = BinomialComplete;
  using Sufficient = BinomialSufficient;

  // x ln p + (n - x) ln(1 - p), with 0 ln 0 = 0 so boundary values are limits.
  double log_likelihood(double p, const BinomialObserved& data) const;
  double log_likelihood(double p, const BinomialComplete& data) const;
  double log_likelihood(double p, const BinomialSufficient& stat) const;

  double mle(const BinomialObserved& data) const;
  double mle(const BinomialComplete& data) const;
  double mle(const BinomialSufficient& stat) const;

  BinomialComplete draw_completion(const BinomialObserved& observed, double p, DrawRng& rng) const;
  BinomialObserved reduce(const BinomialComplete& complete) const { return complete.observed; }

  BinomialSufficient sufficient_statistic(const BinomialComplete& complete) const;
  BinomialSufficient impute_sufficient(const BinomialObserved& observed, double p) const;

  bool in_domain(double p) const { return p >= 0.0 && p <= 1.0; }
  bool is_interior(double p) const { return p > 0.0 && p < 1.0; }
};

static_assert(ExponentialFamilyModel<BinomialModel>);

BinomialModel binomial_model();

/// n_observed / (n_observed + n_missing). The lod is linear in the success
/// count and imputation at the observed MLE keeps the success fraction, so the
/// expected complete-data lod is the observed lod scaled by n_co / n_ob.
double ri1_closed_form(const BinomialObserved& observed);

inline constexpr std::uint64_t kDefaultEnumerationCap = 25;

/// Exact E[functional(Y_co) | Y_ob; theta] by summing over every possible
/// count of missing successes.
double enumerate_expectation(const BinomialObserved& observed, double theta,
                             const std::function<double(const BinomialComplete&)>& functional,
                             std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace relinfo
