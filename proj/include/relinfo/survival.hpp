#pragma once

// Survival data in three views: the censored data as observed (times, status,
// covariates), the uncensored full data when it is available (simulation), and
// the rank data a Cox partial likelihood actually uses (failure order plus risk
// sets, no times).

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace relinfo {

enum class EventStatus { censored = 0, event = 1 };

struct SurvivalRecord {
  double time = 0.0;
  EventStatus status = EventStatus::event;
  std::vector<double> covariates;
};

class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  /// Throws invalid_argument on non-positive or non-finite times, non-finite
  /// covariates, or covariate vectors whose length is not covariate_dim.
  SurvivalDataset(std::vector<SurvivalRecord> records, std::size_t covariate_dim,
                  std::vector<std::string> covariate_names = {});

  const std::vector<SurvivalRecord>& records() const { return records_; }
  const SurvivalRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const { return records_.size(); }
  std::size_t covariate_dim() const { return covariate_dim_; }
  std::size_t event_count() const;
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  Eigen::MatrixXd covariate_matrix() const;  // size() x covariate_dim()

 private:
  std::vector<SurvivalRecord> records_;
  std::size_t covariate_dim_ = 0;
  std::vector<std::string> covariate_names_;
};

/// Reads `time,status,<cov>...` CSV: one header row, comma separated, '.' as
/// the decimal point regardless of locale, status 1 = event and 0 = censored.
/// Blank lines are skipped and a trailing '\r' is stripped. Errors name the
/// file, the 1-based line and the 1-based column.
SurvivalDataset read_survival_csv(const std::filesystem::path& path);
SurvivalDataset parse_survival_csv(const std::string& text, const std::string& source_name);

enum class TieMode {
  breslow,  // tied failures share one risk set
  jitter,   // tied times spread apart deterministically before ranking
};

/// Separates tied times: within a group of equal times the k-th record (input
/// order, k = 0, 1, ...) is shifted up by k * step, where step is a small
/// fraction of the gap to the next distinct time.
SurvivalDataset jitter_ties(const SurvivalDataset& data);

/// Cox's partial data. Subjects are identified by their index in the source
/// dataset. exit_order lists every subject by exit time; at equal times events
/// precede censorings (a subject censored at t is at risk at t) and ties among
/// events keep index order.
struct RankData {
  std::vector<std::size_t> exit_order;
  std::vector<unsigned char> exit_is_event;       // per position in exit_order
  std::vector<std::size_t> failure_order;         // failing subjects, in order
  std::vector<std::size_t> failure_position;      // position of each failure in exit_order
  std::vector<std::size_t> risk_set_begin;        // risk set of failure k = exit_order[begin_k ..]
  Eigen::MatrixXd covariates;                     // per subject, n x p

  std::size_t n_subjects() const { return exit_order.size(); }
  std::size_t n_failures() const { return failure_order.size(); }
  std::size_t covariate_dim() const { return static_cast<std::size_t>(covariates.cols()); }
  std::span<const std::size_t> risk_set(std::size_t k) const {
    return std::span<const std::size_t>(exit_order).subspan(risk_set_begin[k]);
  }
};

/// Throws degenerate_data when there are no events.
RankData extract_rank_data(const SurvivalDataset& data, TieMode ties = TieMode::breslow);

/// Same projection from flat arrays; used on hot Monte Carlo paths.
RankData extract_rank_data(std::span<const double> times, std::span<const unsigned char> events,
                           const Eigen::MatrixXd& covariates);

}  // namespace relinfo
