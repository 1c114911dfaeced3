#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "relinfo/error.hpp"
#include "relinfo/survival.hpp"

using namespace relinfo;

namespace {

SurvivalDataset make(std::vector<std::pair<double, int>> rows, std::vector<double> z = {}) {
  std::vector<SurvivalRecord> records;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    records.push_back({rows[i].first, rows[i].second ? EventStatus::event : EventStatus::censored,
                       {z.empty() ? static_cast<double>(i % 2) : z[i]}});
  }
  return SurvivalDataset(std::move(records), 1);
}

std::string parse_error(const std::string& text) {
  try {
    parse_survival_csv(text, "input.csv");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    return e.what();
  }
  ADD_FAILURE() << "expected a parse error";
  return {};
}

}  // namespace

TEST(SurvivalCsv, ParsesWellFormedInput) {
  const auto d = parse_survival_csv("time,status,age,arm\r\n1.5,1,60,0\n\n2e0,0,+55.5,1\n", "x.csv");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.covariate_dim(), 2u);
  EXPECT_EQ(d.covariate_names()[0], "age");
  EXPECT_EQ(d.covariate_names()[1], "arm");
  EXPECT_EQ(d[0].time, 1.5);
  EXPECT_EQ(d[0].status, EventStatus::event);
  EXPECT_EQ(d[1].time, 2.0);
  EXPECT_EQ(d[1].status, EventStatus::censored);
  EXPECT_EQ(d[1].covariates[0], 55.5);
  EXPECT_EQ(d.event_count(), 1u);
}

TEST(SurvivalCsv, ErrorsNameLineAndColumn) {
  EXPECT_EQ(parse_error("time,status,z\n1,1,0\n2,1,abc\n"), "input.csv:3:3: not a number: 'abc'");
  EXPECT_EQ(parse_error("time,status,z\n1,2,0\n"), "input.csv:2:2: status must be 0 or 1, found '2'");
  EXPECT_EQ(parse_error("time,status,z\n1,1\n"), "input.csv:2:3: expected 3 fields, found 2");
  EXPECT_EQ(parse_error("time,status,z\n-1,1,0\n"), "input.csv:2:1: time must be positive");
  EXPECT_EQ(parse_error("t,status,z\n"), "input.csv:1:1: first header column must be 'time'");
  EXPECT_EQ(parse_error("time,status\n"), "input.csv:1:1: header needs time,status and at least one covariate");
  EXPECT_EQ(parse_error("time,status,z\n1,1,1,5\n"), "input.csv:2:4: expected 3 fields, found 4");
  EXPECT_EQ(parse_error("time,status,z\n1,1,0x1\n"), "input.csv:2:3: not a number: '0x1'");
}

TEST(SurvivalCsv, DecimalPointOnlyNoLocale) {
  EXPECT_EQ(parse_error("time,status,z\n1,5,1,0\n"), "input.csv:2:4: expected 3 fields, found 4");
  EXPECT_EQ(parse_error("time,status,z\n1;5,1,0\n"), "input.csv:2:1: not a number: '1;5'");
}

TEST(SurvivalCsv, MissingFileIsIoError) {
  try {
    read_survival_csv("/nonexistent/definitely/missing.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io);
  }
}

TEST(SurvivalCsv, ReadsFile) {
  const auto path = std::filesystem::temp_directory_path() / "relinfo_survival_test.csv";
  std::ofstream(path) << "time,status,z\n3,1,1\n1,0,0\n";
  const auto d = read_survival_csv(path);
  EXPECT_EQ(d.size(), 2u);
  std::filesystem::remove(path);
}

TEST(SurvivalDataset, RejectsInvalidRecords) {
  EXPECT_THROW(make({{0.0, 1}}), Error);
  EXPECT_THROW(make({{INFINITY, 1}}), Error);
  EXPECT_THROW(SurvivalDataset({{1.0, EventStatus::event, {1.0, 2.0}}}, 1), Error);
}

TEST(RankData, ThreeEvents) {
  const auto r = extract_rank_data(make({{3, 1}, {1, 1}, {2, 1}}));
  EXPECT_EQ(r.failure_order, (std::vector<std::size_t>{1, 2, 0}));
  ASSERT_EQ(r.n_failures(), 3u);
  EXPECT_EQ(r.risk_set(0).size(), 3u);
  EXPECT_EQ(r.risk_set(1).size(), 2u);
  EXPECT_EQ(r.risk_set(2).size(), 1u);
}

TEST(RankData, CensoredBeforeFirstEventInNoRiskSet) {
  const auto r = extract_rank_data(make({{0.5, 0}, {1, 1}, {2, 1}}));
  for (std::size_t k = 0; k < r.n_failures(); ++k) {
    for (std::size_t s : r.risk_set(k)) EXPECT_NE(s, 0u);
  }
}

TEST(RankData, MixedFiveSubjectFixture) {
  // Subjects: 0:t=4 event, 1:t=2 censored, 2:t=1 event, 3:t=3 event, 4:t=5 censored.
  const auto r = extract_rank_data(make({{4, 1}, {2, 0}, {1, 1}, {3, 1}, {5, 0}}));
  EXPECT_EQ(r.exit_order, (std::vector<std::size_t>{2, 1, 3, 0, 4}));
  EXPECT_EQ(r.failure_order, (std::vector<std::size_t>{2, 3, 0}));
  auto set = [&](std::size_t k) {
    auto s = r.risk_set(k);
    std::vector<std::size_t> v(s.begin(), s.end());
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(set(0), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(set(1), (std::vector<std::size_t>{0, 3, 4}));
  EXPECT_EQ(set(2), (std::vector<std::size_t>{0, 4}));
}

TEST(RankData, TiedFailuresShareRiskSet) {
  // Two events tied at t=2 and a censoring tied with them.
  const auto r = extract_rank_data(make({{2, 1}, {2, 0}, {2, 1}, {1, 1}, {3, 1}}));
  ASSERT_EQ(r.n_failures(), 4u);
  EXPECT_EQ(r.risk_set(1).size(), 4u);
  EXPECT_EQ(r.risk_set(2).size(), 4u);
  // Events precede the censoring at a tied time.
  EXPECT_TRUE(r.exit_is_event[1]);
  EXPECT_TRUE(r.exit_is_event[2]);
  EXPECT_FALSE(r.exit_is_event[3]);
}

TEST(RankData, NoEventsIsDegenerate) {
  try {
    extract_rank_data(make({{1, 0}, {2, 0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_data);
  }
}

TEST(RankData, InvariantUnderIncreasingTimeTransform) {
  const std::vector<std::pair<double, int>> rows{{0.3, 1}, {2.5, 0}, {1.1, 1}, {0.9, 1}, {4.0, 1}, {2.5, 1}};
  auto transformed = rows;
  for (auto& [t, e] : transformed) t = std::exp(3 * t) + t * t;
  const auto a = extract_rank_data(make(rows));
  const auto b = extract_rank_data(make(transformed));
  EXPECT_EQ(a.exit_order, b.exit_order);
  EXPECT_EQ(a.failure_order, b.failure_order);
  EXPECT_EQ(a.risk_set_begin, b.risk_set_begin);
  EXPECT_EQ(a.exit_is_event, b.exit_is_event);
}

TEST(JitterTies, BreaksTiesDeterministicallyPreservingOrder) {
  const auto d = make({{2, 1}, {1, 1}, {2, 1}, {2, 0}, {3, 1}});
  const auto j = jitter_ties(d);
  EXPECT_EQ(j[0].time, 2.0);
  EXPECT_GT(j[2].time, j[0].time);
  EXPECT_GT(j[3].time, j[2].time);
  EXPECT_LT(j[3].time, 3.0);
  EXPECT_EQ(j[1].time, 1.0);
  const auto again = jitter_ties(d);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(j[i].time, again[i].time);
  const auto r = extract_rank_data(d, TieMode::jitter);
  for (std::size_t k = 0; k + 1 < r.n_failures(); ++k) EXPECT_GT(r.risk_set(k).size(), r.risk_set(k + 1).size());
}
