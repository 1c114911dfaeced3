#include "relinfo/binomial.hpp"

#include <cmath>
#include <string>

namespace relinfo {

namespace {

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double binomial_loglik(double p, double successes, double trials) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::domain, "binomial probability outside [0, 1]");
  return xlogy(successes, p) + xlogy(trials - successes, 1.0 - p);
}

}  // namespace

void BinomialObserved::validate() const {
  if (n_observed == 0) fail(ErrorCode::invalid_argument, "n_observed must be positive");
  if (successes > n_observed) fail(ErrorCode::invalid_argument, "successes exceed n_observed");
}

double BinomialModel::log_likelihood(double p, const BinomialObserved& data) const {
  data.validate();
  return binomial_loglik(p, static_cast<double>(data.successes), static_cast<double>(data.n_observed));
}

double BinomialModel::log_likelihood(double p, const BinomialComplete& data) const {
  return binomial_loglik(p, static_cast<double>(data.successes_total()), static_cast<double>(data.n_total()));
}

double BinomialModel::log_likelihood(double p, const BinomialSufficient& stat) const {
  return binomial_loglik(p, stat.successes, stat.trials);
}

double BinomialModel::mle(const BinomialObserved& data) const {
  data.validate();
  return static_cast<double>(data.successes) / static_cast<double>(data.n_observed);
}

double BinomialModel::mle(const BinomialComplete& data) const {
  return static_cast<double>(data.successes_total()) / static_cast<double>(data.n_total());
}

double BinomialModel::mle(const BinomialSufficient& stat) const {
  if (!(stat.trials > 0.0)) fail(ErrorCode::invalid_argument, "sufficient statistic has no trials");
  return stat.successes / stat.trials;
}

BinomialComplete BinomialModel::draw_completion(const BinomialObserved& observed, double p, DrawRng& rng) const {
  return BinomialComplete{observed, sample_binomial(rng, observed.n_missing, p)};
}

BinomialSufficient BinomialModel::sufficient_statistic(const BinomialComplete& complete) const {
  return {static_cast<double>(complete.successes_total()), static_cast<double>(complete.n_total())};
}

BinomialSufficient BinomialModel::impute_sufficient(const BinomialObserved& observed, double p) const {
  observed.validate();
  if (!in_domain(p)) fail(ErrorCode::domain, "binomial probability outside [0, 1]");
  return {static_cast<double>(observed.successes) + static_cast<double>(observed.n_missing) * p,
          static_cast<double>(observed.n_observed + observed.n_missing)};
}

BinomialModel binomial_model() { return {}; }

double ri1_closed_form(const BinomialObserved& observed) {
  observed.validate();
  if (observed.successes == 0 || observed.successes == observed.n_observed) {
    fail(ErrorCode::boundary, "observed proportion is 0 or 1; the MLE lies on the boundary");
  }
  return static_cast<double>(observed.n_observed) /
         static_cast<double>(observed.n_observed + observed.n_missing);
}

double enumerate_expectation(const BinomialObserved& observed, double theta,
                             const std::function<double(const BinomialComplete&)>& functional,
                             std::uint64_t cap) {
  observed.validate();
  if (!(theta >= 0.0 && theta <= 1.0)) fail(ErrorCode::domain, "binomial probability outside [0, 1]");
  if (observed.n_missing > cap) {
    fail(ErrorCode::oracle_unavailable,
         "n_missing " + std::to_string(observed.n_missing) + " exceeds the enumeration cap " + std::to_string(cap));
  }
  const std::uint64_t m = observed.n_missing;
  const double dm = static_cast<double>(m);
  double total = 0.0;
  for (std::uint64_t k = 0; k <= m; ++k) {
    const double dk = static_cast<double>(k);
    double pmf;
    if (theta == 0.0) {
      pmf = k == 0 ? 1.0 : 0.0;
    } else if (theta == 1.0) {
      pmf = k == m ? 1.0 : 0.0;
    } else {
      pmf = std::exp(std::lgamma(dm + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dm - dk + 1.0) +
                     dk * std::log(theta) + (dm - dk) * std::log1p(-theta));
    }
    if (pmf == 0.0) continue;
    total += pmf * functional(BinomialComplete{observed, k});
  }
  return total;
}

}  // namespace relinfo
