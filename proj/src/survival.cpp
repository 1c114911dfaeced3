#include "relinfo/survival.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "relinfo/error.hpp"

namespace relinfo {

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records, std::size_t covariate_dim,
                                 std::vector<std::string> covariate_names)
    : records_(std::move(records)), covariate_dim_(covariate_dim), covariate_names_(std::move(covariate_names)) {
  if (covariate_dim_ == 0) fail(ErrorCode::invalid_argument, "covariate dimension must be positive");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + ": time must be positive and finite");
    }
    if (r.covariates.size() != covariate_dim_) {
      fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + ": covariate dimension mismatch");
    }
    for (double z : r.covariates) {
      if (!std::isfinite(z)) fail(ErrorCode::invalid_argument, "record " + std::to_string(i) + ": non-finite covariate");
    }
  }
  if (covariate_names_.empty()) {
    for (std::size_t j = 0; j < covariate_dim_; ++j) covariate_names_.push_back("cov" + std::to_string(j + 1));
  }
  if (covariate_names_.size() != covariate_dim_) {
    fail(ErrorCode::invalid_argument, "covariate name count does not match the covariate dimension");
  }
}

std::size_t SurvivalDataset::event_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                [](const SurvivalRecord& r) { return r.status == EventStatus::event; }));
}

Eigen::MatrixXd SurvivalDataset::covariate_matrix() const {
  Eigen::MatrixXd z(static_cast<Eigen::Index>(records_.size()), static_cast<Eigen::Index>(covariate_dim_));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (std::size_t j = 0; j < covariate_dim_; ++j) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records_[i].covariates[j];
    }
  }
  return z;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void csv_error(const std::string& source, std::size_t line, std::size_t column, const std::string& what) {
  fail(ErrorCode::parse, source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

double parse_number(std::string_view field, const std::string& source, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (field.empty() || ec != std::errc() || ptr != last) {
    csv_error(source, line, column, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) csv_error(source, line, column, "non-finite value");
  return value;
}

}  // namespace

SurvivalDataset parse_survival_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::size_t width = 0;
  std::vector<SurvivalRecord> records;
  bool have_header = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 3) csv_error(source, line_no, 1, "header needs time,status and at least one covariate");
      if (fields[0] != "time") csv_error(source, line_no, 1, "first header column must be 'time'");
      if (fields[1] != "status") csv_error(source, line_no, 2, "second header column must be 'status'");
      for (std::size_t c = 2; c < fields.size(); ++c) {
        if (fields[c].empty()) csv_error(source, line_no, c + 1, "empty covariate name");
        names.emplace_back(fields[c]);
      }
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      csv_error(source, line_no, std::min(fields.size(), width) + 1,
                "expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    SurvivalRecord rec;
    rec.time = parse_number(fields[0], source, line_no, 1);
    if (!(rec.time > 0.0)) csv_error(source, line_no, 1, "time must be positive");
    if (fields[1] == "1") {
      rec.status = EventStatus::event;
    } else if (fields[1] == "0") {
      rec.status = EventStatus::censored;
    } else {
      csv_error(source, line_no, 2, "status must be 0 or 1, found '" + std::string(fields[1]) + "'");
    }
    for (std::size_t c = 2; c < width; ++c) rec.covariates.push_back(parse_number(fields[c], source, line_no, c + 1));
    records.push_back(std::move(rec));
  }
  if (!have_header) fail(ErrorCode::parse, source + ": missing header row");
  const std::size_t dim = names.size();
  return SurvivalDataset(std::move(records), dim, std::move(names));
}

SurvivalDataset read_survival_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_survival_csv(buffer.str(), path.string());
}

SurvivalDataset jitter_ties(const SurvivalDataset& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data[a].time < data[b].time; });
  std::vector<SurvivalRecord> records = data.records();
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t h = g;
    while (h < order.size() && data[order[h]].time == data[order[g]].time) ++h;
    if (h - g > 1) {
      const double t = data[order[g]].time;
      const double next_gap = h < order.size() ? data[order[h]].time - t : std::max(1.0, t);
      const double step = std::min(next_gap, std::max(1.0, t)) * 1e-6 / static_cast<double>(h - g);
      // Stable sort keeps input order inside the group.
      for (std::size_t k = 1; k < h - g; ++k) records[order[g + k]].time = t + static_cast<double>(k) * step;
    }
    g = h;
  }
  return SurvivalDataset(std::move(records), data.covariate_dim(), data.covariate_names());
}

RankData extract_rank_data(std::span<const double> times, std::span<const unsigned char> events,
                           const Eigen::MatrixXd& covariates) {
  const std::size_t n = times.size();
  RankData rank;
  rank.exit_order.resize(n);
  std::iota(rank.exit_order.begin(), rank.exit_order.end(), std::size_t{0});
  std::sort(rank.exit_order.begin(), rank.exit_order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    if (events[a] != events[b]) return events[a] > events[b];
    return a < b;
  });
  rank.exit_is_event.resize(n);
  std::size_t group_start = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t subject = rank.exit_order[pos];
    if (pos > 0 && times[subject] != times[rank.exit_order[pos - 1]]) group_start = pos;
    rank.exit_is_event[pos] = events[subject];
    if (events[subject]) {
      rank.failure_order.push_back(subject);
      rank.failure_position.push_back(pos);
      rank.risk_set_begin.push_back(group_start);
    }
  }
  if (rank.failure_order.empty()) fail(ErrorCode::degenerate_data, "no events: partial data are empty");
  rank.covariates = covariates;
  return rank;
}

RankData extract_rank_data(const SurvivalDataset& input, TieMode ties) {
  SurvivalDataset jittered;
  const SurvivalDataset* source = &input;
  if (ties == TieMode::jitter) {
    jittered = jitter_ties(input);
    source = &jittered;
  }
  std::vector<double> times(source->size());
  std::vector<unsigned char> events(source->size());
  for (std::size_t i = 0; i < source->size(); ++i) {
    times[i] = (*source)[i].time;
    events[i] = (*source)[i].status == EventStatus::event ? 1 : 0;
  }
  return extract_rank_data(times, events, source->covariate_matrix());
}

}  // namespace relinfo
