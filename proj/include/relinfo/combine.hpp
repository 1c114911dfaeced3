#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relinfo/binomial.hpp"

namespace relinfo {

struct StudySummary {
  double lod_observed = 0.0;
  double ri1 = 1.0;
  std::string label;
};

/// (sum_i w_i / RI1_i)^-1 with w_i = lod_i / sum_j lod_j.
///
/// Equal to (sum_i lod_i) / (sum_i E[lod_co,i]), i.e. the RI1 of the pooled
/// independent studies, provided every study's lod and expectation use the
/// same hypothesis pair and expectation parameter.
double combine_weighted_harmonic(const std::vector<StudySummary>& studies);

struct PooledBinomial {
  std::vector<StudySummary> studies;  // per-study lod and RI1 at the shared pair
  double pooled_ri1 = 0.0;            // RI1 of the concatenated data, same pair
  double theta_alt = 0.0;             // shared alternative (pooled observed MLE unless given)
  double theta_null = 0.0;
};

/// Per-study summaries for independent binomial studies evaluated at one
/// shared pair (theta_null, theta_alt) with expectations at theta_alt.
/// theta_alt defaults to the pooled observed-data MLE.
PooledBinomial binomial_study_summaries(const std::vector<BinomialObserved>& studies, double theta_null,
                                        std::optional<double> theta_alt = std::nullopt,
                                        const std::vector<std::string>& labels = {});

}  // namespace relinfo
