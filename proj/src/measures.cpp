#include "relinfo/measures.hpp"

#include <algorithm>

namespace relinfo {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::domain: return "domain";
    case ErrorCode::boundary: return "boundary";
    case ErrorCode::undefined_measure: return "undefined_measure";
    case ErrorCode::instability: return "instability";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::oracle_unavailable: return "oracle_unavailable";
    case ErrorCode::estimation_failure: return "estimation_failure";
    case ErrorCode::degenerate_data: return "degenerate_data";
    case ErrorCode::separation: return "separation";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::data_integrity: return "data_integrity";
  }
  return "unknown";
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::closed_form: return "closed_form";
    case Method::sufficient_stat_imputation: return "sufficient_stat_imputation";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

MCEstimate reciprocal_mean(const RiYSamples& samples) {
  std::vector<double> reciprocals;
  reciprocals.reserve(samples.samples.size());
  for (double s : samples.samples) {
    reciprocals.push_back(std::isfinite(s) ? 1.0 / s : std::numeric_limits<double>::quiet_NaN());
  }
  return summarize_mean(reciprocals);
}

double ri_y_spread(const RiYSamples& samples) {
  std::vector<double> finite;
  for (double s : samples.samples) {
    if (std::isfinite(s)) finite.push_back(s);
  }
  if (finite.size() < 2) return 0.0;
  const double mean = pairwise_sum(finite) / static_cast<double>(finite.size());
  std::vector<double> sq(finite.size());
  std::transform(finite.begin(), finite.end(), sq.begin(), [&](double x) { return (x - mean) * (x - mean); });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(finite.size() - 1));
}

}  // namespace relinfo
