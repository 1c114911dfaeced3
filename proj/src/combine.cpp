#include "relinfo/combine.hpp"

#include <cmath>

#include "relinfo/error.hpp"

namespace relinfo {

double combine_weighted_harmonic(const std::vector<StudySummary>& studies) {
  if (studies.empty()) fail(ErrorCode::invalid_argument, "combine needs at least one study");
  double total_lod = 0.0;
  for (const auto& s : studies) {
    if (!(s.lod_observed > 0.0) || !std::isfinite(s.lod_observed)) {
      fail(ErrorCode::domain, "study '" + s.label + "': observed lod must be positive");
    }
    if (!(s.ri1 > 0.0 && s.ri1 <= 1.0)) fail(ErrorCode::domain, "study '" + s.label + "': ri1 must lie in (0, 1]");
    total_lod += s.lod_observed;
  }
  double inverse = 0.0;
  for (const auto& s : studies) inverse += (s.lod_observed / total_lod) / s.ri1;
  return 1.0 / inverse;
}

PooledBinomial binomial_study_summaries(const std::vector<BinomialObserved>& studies, double theta_null,
                                        std::optional<double> theta_alt, const std::vector<std::string>& labels) {
  if (studies.empty()) fail(ErrorCode::invalid_argument, "at least one study is required");
  if (!labels.empty() && labels.size() != studies.size()) {
    fail(ErrorCode::invalid_argument, "label count does not match study count");
  }
  const BinomialModel model;
  BinomialObserved pooled{0, 0, 0};
  for (const auto& s : studies) {
    s.validate();
    pooled.successes += s.successes;
    pooled.n_observed += s.n_observed;
    pooled.n_missing += s.n_missing;
  }
  PooledBinomial out;
  out.theta_null = theta_null;
  out.theta_alt = theta_alt.value_or(model.mle(pooled));
  const HypothesisPair<double> pair = make_hypothesis_pair(model, theta_null, out.theta_alt);
  const Ri1Options exact{ExpectationRoute::imputation, {}};
  for (std::size_t i = 0; i < studies.size(); ++i) {
    const RelInfoResult r = ri1_at(model, studies[i], pair, out.theta_alt, exact);
    out.studies.push_back({r.numerator, r.estimate, labels.empty() ? "study" + std::to_string(i + 1) : labels[i]});
  }
  out.pooled_ri1 = ri1_at(model, pooled, pair, out.theta_alt, exact).estimate;
  return out;
}

}  // namespace relinfo
