#include <gtest/gtest.h>

#include <sstream>

#include "coxgibbs/dataset.hpp"
#include "coxgibbs/errors.hpp"
#include "oracles.hpp"

using namespace coxgibbs;

namespace {

SurvivalDataset make(std::vector<double> t, std::vector<int> e, Eigen::MatrixXd x) {
  return SurvivalDataset(Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Index>(t.size())),
                         Eigen::Map<Eigen::VectorXi>(e.data(), static_cast<Index>(e.size())), std::move(x));
}

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd x(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double a : v) x(i++, 0) = a;
  return x;
}

LoadResult parse(const std::string& text, CsvSchema schema) {
  std::istringstream in(text);
  return read_csv(in, schema);
}

}  // namespace

TEST(SurvivalDataset, RejectsInvalidInput) {
  EXPECT_THROW(make({1.0, -1.0}, {1, 0}, column({0, 1})), std::invalid_argument);
  EXPECT_THROW(make({1.0, 2.0}, {1, 2}, column({0, 1})), std::invalid_argument);
  EXPECT_THROW(make({1.0}, {1}, column({0})), std::invalid_argument);
  EXPECT_THROW(make({1.0, 2.0}, {1, 0}, Eigen::MatrixXd(2, 0)), std::invalid_argument);
  EXPECT_THROW(make({1.0, NAN}, {1, 0}, column({0, 1})), std::invalid_argument);
  EXPECT_THROW(make({1.0, 2.0}, {1, 0}, column({0, INFINITY})), std::invalid_argument);
  EXPECT_THROW(make({1.0, 2.0, 3.0}, {1, 0}, column({0, 1, 2})), std::invalid_argument);
}

TEST(SurvivalDataset, DefaultColumnNamesAndSelectRows) {
  const auto d = make({3, 1, 2}, {1, 0, 1}, column({10, 20, 30}));
  EXPECT_EQ(d.column_names(), std::vector<std::string>{"x1"});
  const std::vector<Index> rows{2, 2, 0};
  const auto s = d.select_rows(rows);
  EXPECT_EQ(s.n(), 3);
  EXPECT_EQ(s.times()[0], 2.0);
  EXPECT_EQ(s.covariates()(2, 0), 10.0);
  EXPECT_EQ(s.event_count(), 3);
}

TEST(RiskSet, DistinctTimes) {
  const auto d = make({1, 2, 3}, {1, 1, 1}, column({0, 0, 0}));
  EXPECT_EQ(risk_set(d, 0), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(risk_set(d, 2), (std::vector<Index>{2}));
}

TEST(RiskSet, TiesAreMutualMembers) {
  const auto d = make({2, 2, 5}, {1, 1, 0}, column({0, 0, 0}));
  EXPECT_EQ(risk_set(d, 0), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(risk_set(d, 1), (std::vector<Index>{0, 1, 2}));
}

TEST(RiskSet, IndexOutOfRange) {
  const auto d = make({1, 2}, {1, 1}, column({0, 0}));
  EXPECT_THROW(risk_set(d, 2), std::out_of_range);
  EXPECT_THROW(risk_set(d, -1), std::out_of_range);
}

TEST(RiskSet, SizesMatchDoubleLoop) {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const auto d = oracle::random_instance(seed, 40, 2);
    std::size_t fast = 0, slow = 0;
    for (Index i = 0; i < d.n(); ++i) {
      const auto r = risk_set(d, i);
      fast += r.size();
      EXPECT_NE(std::find(r.begin(), r.end(), i), r.end());
      for (Index j = 0; j < d.n(); ++j) slow += d.times()[j] >= d.times()[i];
    }
    EXPECT_EQ(fast, slow);
  }
}

TEST(PairContrasts, ThreeSubjectsAllEvents) {
  const auto d = make({1, 2, 3}, {1, 1, 1}, column({5, 7, 11}));
  const auto pc = build_pair_contrasts(d);
  ASSERT_EQ(pc.size(), 3);
  EXPECT_EQ(pc.pair_index, (std::vector<std::pair<Index, Index>>{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(pc.contrasts(0, 0), -2.0);
  EXPECT_EQ(pc.contrasts(1, 0), -6.0);
  EXPECT_EQ(pc.contrasts(2, 0), -4.0);
}

TEST(PairContrasts, SinglePair) {
  const auto d = make({1, 2}, {1, 0}, column({0.25, 2.0}));
  const auto pc = build_pair_contrasts(d);
  ASSERT_EQ(pc.size(), 1);
  EXPECT_EQ(pc.contrasts(0, 0), 0.25 - 2.0);
}

TEST(PairContrasts, NoEventsIsAnError) {
  const auto d = make({1, 2}, {0, 0}, column({0, 1}));
  EXPECT_THROW(build_pair_contrasts(d), EmptyPairsError);
  EXPECT_EQ(count_pairs(d), 0u);
}

TEST(PairContrasts, LastSubjectOnlyEventIsEmpty) {
  const auto d = make({1, 2}, {0, 1}, column({0, 1}));
  EXPECT_THROW(build_pair_contrasts(d), EmptyPairsError);
}

TEST(PairContrasts, LimitGuard) {
  const auto d = oracle::random_instance(3, 30, 2);
  EXPECT_THROW(build_pair_contrasts(d, 10), PairLimitError);
}

TEST(PairContrasts, AllDistinctUncensoredIsNChooseTwo) {
  const Index n = 25;
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 1.0, 25.0);
  const auto d = SurvivalDataset(t, Eigen::VectorXi::Ones(n), Eigen::MatrixXd::Random(n, 2));
  EXPECT_EQ(build_pair_contrasts(d).size(), n * (n - 1) / 2);
}

TEST(PairContrasts, MatchesBruteForceExactly) {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const auto d = oracle::random_instance(seed, 35, 3);
    const auto pc = build_pair_contrasts(d);
    auto brute = oracle::brute_pairs(d);
    std::size_t expected = 0;
    for (Index i = 0; i < d.n(); ++i) {
      if (d.events()[i]) expected += risk_set(d, i).size() - 1;
    }
    ASSERT_EQ(static_cast<std::size_t>(pc.size()), expected);
    ASSERT_EQ(count_pairs(d), expected);
    auto got = pc.pair_index;
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, brute);
    for (Index q = 0; q < pc.size(); ++q) {
      const auto [i, j] = pc.pair_index[static_cast<std::size_t>(q)];
      EXPECT_EQ(d.events()[i], 1);
      ASSERT_TRUE((pc.contrasts.row(q).array() ==
                   (d.covariates().row(i) - d.covariates().row(j)).array()).all());
      if (q > 0) {
        EXPECT_LE(pc.pair_index[static_cast<std::size_t>(q - 1)].first, i);
      }
    }
  }
}

TEST(Csv, ThreeRowsNothingDropped) {
  CsvSchema s;
  s.covariate_cols = {"x"};
  const auto r = parse("time,status,x\n1,1,0.5\n2,0,1.5\n3,1,-2\n", s);
  EXPECT_EQ(r.data.n(), 3);
  EXPECT_EQ(r.dropped_rows, 0u);
  EXPECT_EQ(r.raw_rows, 3u);
  EXPECT_EQ(r.data.events(), Eigen::Vector3i(1, 0, 1));
  EXPECT_EQ(r.data.column_names(), std::vector<std::string>{"x"});
}

TEST(Csv, MissingCellsDropRows) {
  CsvSchema s;
  s.covariate_cols = {"age", "meal.cal"};
  const auto r = parse("time,status,age,meal.cal\n1,1,50,1000\n2,0,60,\n3,1,70,NA\n4,1,80,900\n", s);
  EXPECT_EQ(r.data.n(), 2);
  EXPECT_EQ(r.dropped_rows, 2u);
}

TEST(Csv, MissingScopeAllColumns) {
  CsvSchema s;
  s.covariate_cols = {"x"};
  const std::string text = "inst,time,status,x\n1,1,1,0\n,2,0,1\n3,3,1,2\n";
  EXPECT_EQ(parse(text, s).data.n(), 3);
  s.missing = MissingScope::all_columns;
  EXPECT_EQ(parse(text, s).data.n(), 2);
}

TEST(Csv, EventCodeRecoding) {
  CsvSchema s;
  s.covariate_cols = {"x"};
  s.status_event_code = 2;
  const auto r = parse("time,status,x\n1,2,0\n2,1,1\n3,2,2\n", s);
  EXPECT_EQ(r.data.events(), Eigen::Vector3i(1, 0, 1));
}

TEST(Csv, QuotedFieldsAndBom) {
  CsvSchema s;
  s.covariate_cols = {"a b"};
  const auto r = parse("\xEF\xBB\xBF\"time\",\"status\",\"a b\"\n\"1\",1,\"2.5\"\r\n2,0,3\n", s);
  EXPECT_EQ(r.data.n(), 2);
  EXPECT_EQ(r.data.covariates()(0, 0), 2.5);
}

TEST(Csv, ErrorsAreTyped) {
  CsvSchema s;
  s.covariate_cols = {"x"};
  EXPECT_THROW(parse("time,status,y\n1,1,0\n2,0,1\n", s), SchemaError);
  EXPECT_THROW(parse("time,status,x\n1,1,0\n2,0,1\n3,2,1\n", s), SchemaError);
  EXPECT_THROW(parse("time,status,x\n1,1,0\n2,0,NA\n", s), InsufficientDataError);
  try {
    parse("time,status,x\n1,1,0\n2,0,abc\n3,1,1\n", s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(Csv, LungCompleteCases) {
  CsvSchema s;
  s.status_event_code = 2;
  s.covariate_cols = {"age", "sex", "ph.ecog", "ph.karno", "pat.karno", "meal.cal", "wt.loss"};
  s.missing = MissingScope::all_columns;
  const auto r = load_csv(oracle::data_path("lung.csv"), s);
  EXPECT_EQ(r.raw_rows, 228u);
  EXPECT_EQ(r.data.n(), 167);
  EXPECT_EQ(r.data.event_count(), 120);
  EXPECT_EQ(count_pairs(r.data), 10586u);
  s.missing = MissingScope::selected_columns;
  EXPECT_EQ(load_csv(oracle::data_path("lung.csv"), s).data.n(), 168);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto d = oracle::random_instance(4, 20, 3, false);
  std::ostringstream out;
  write_csv(d, out);
  CsvSchema s;
  s.covariate_cols = {"x1", "x2", "x3"};
  const auto back = parse(out.str(), s).data;
  EXPECT_EQ(back.times(), d.times());
  EXPECT_EQ(back.events(), d.events());
  EXPECT_EQ(back.covariates(), d.covariates());
}
