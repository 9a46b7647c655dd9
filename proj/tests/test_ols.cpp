#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "aadt/error.hpp"
#include "aadt/linalg.hpp"
#include "aadt/ols.hpp"
#include "aadt/rng.hpp"
#include "experiments.hpp"
#include "oracles.hpp"

using namespace aadt;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Problem random_problem(std::uint64_t seed, int n, int p, double sigma = 0.5) {
  Rng rng(seed);
  Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double v = 3.0;
    for (int j = 0; j < p; ++j) {
      pr.X(i, j) = rng.normal() * (j + 1);
      v += (j % 2 ? -1.0 : 0.5) * pr.X(i, j);
    }
    pr.y(i) = v + sigma * rng.normal();
  }
  return pr;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A << Eigen::VectorXd::Ones(X.rows()), X;
  return A;
}

}  // namespace

TEST(OlsFit, ExactLine) {
  Eigen::MatrixXd X(5, 1);
  X << 0, 1, 2, 3, 4;
  const Eigen::VectorXd y = (2.0 * X.col(0)).array() + 1.0;
  const auto m = ols::fit(X, y);
  EXPECT_NEAR(m.intercept, 1.0, 1e-12);
  EXPECT_NEAR(m.coefficients[0], 2.0, 1e-12);
  EXPECT_NEAR(m.r2, 1.0, 1e-12);
  EXPECT_EQ(m.residual_df, 3);
}

TEST(OlsFit, ConstantTargetHasZeroR2) {
  Eigen::MatrixXd X(6, 1);
  X << 1, 4, 2, 8, 5, 7;
  const auto m = ols::fit(X, Eigen::VectorXd::Constant(6, 4.5));
  EXPECT_NEAR(m.coefficients[0], 0.0, 1e-12);
  EXPECT_NEAR(m.intercept, 4.5, 1e-12);
  EXPECT_EQ(m.r2, 0.0);
}

TEST(OlsFit, MatchesPseudoInverseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pr = random_problem(seed, 50, 4);
    const auto m = ols::fit(pr.X, pr.y);
    const Eigen::VectorXd w = oracle::pinv_solve(with_intercept(pr.X), pr.y);
    EXPECT_NEAR(m.intercept, w(0), 1e-8);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(m.coefficients[static_cast<std::size_t>(j)], w(j + 1), 1e-8);
  }
}

TEST(OlsFit, ResidualsOrthogonalToDesign) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pr = random_problem(100 + seed, 80, 6);
    const auto m = ols::fit(pr.X, pr.y);
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(80, m.intercept);
    for (int j = 0; j < 6; ++j) fitted += m.coefficients[static_cast<std::size_t>(j)] * pr.X.col(j);
    const Eigen::VectorXd r = pr.y - fitted;
    EXPECT_LE((with_intercept(pr.X).transpose() * r).cwiseAbs().maxCoeff(), 1e-8 * pr.y.norm());
    EXPECT_GE(m.r2, 0.0);
    EXPECT_LE(m.r2, 1.0);
  }
}

TEST(OlsFit, NestedFitsNeverIncreaseSse) {
  const auto pr = random_problem(9, 60, 6);
  double previous = 1e300;
  for (int k = 1; k <= 6; ++k) {
    const double sse = ols::fit(pr.X.leftCols(k), pr.y).sse;
    EXPECT_LE(sse, previous * (1 + 1e-12));
    previous = sse;
  }
}

TEST(OlsFit, RankDeficiencyNamesColumns) {
  auto pr = random_problem(3, 30, 3);
  pr.X.col(2) = 2.0 * pr.X.col(0) - pr.X.col(1);
  try {
    ols::fit(pr.X, pr.y, {"h1", "h2", "h3"});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dependent columns"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("h"), std::string::npos);
  }
  EXPECT_THROW(ols::fit(pr.X.topRows(3), pr.y.head(3)), DataError);
}

TEST(OlsStepwise, RecoversPlantedPair) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    hits += test::ols_planted_selection(seed) == std::vector<std::string>{"x2", "x5"};
  EXPECT_GE(hits, 95);
}

TEST(OlsStepwise, LooseThresholdsKeepPlantedPair) {
  ols::StepwiseConfig cfg;
  cfg.p_enter = cfg.p_remove = 0.5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cols = test::ols_planted_selection(seed, cfg);
    EXPECT_NE(std::find(cols.begin(), cols.end(), "x2"), cols.end());
    EXPECT_NE(std::find(cols.begin(), cols.end(), "x5"), cols.end());
  }
}

TEST(OlsStepwise, PureNoiseMostlyEmpty) {
  int empty = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(200, 10);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
      for (Eigen::Index j = 0; j < 10; ++j) X(i, j) = rng.normal();
      y(i) = rng.normal();
    }
    empty += ols::stepwise(X, y).columns.empty();
  }
  EXPECT_GT(empty, 15);
}

TEST(OlsStepwise, InvariantToRowOrder) {
  Rng rng(77);
  Eigen::MatrixXd X(120, 8);
  Eigen::VectorXd y(120);
  for (Eigen::Index i = 0; i < 120; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) X(i, j) = rng.normal();
    y(i) = X(i, 1) + 0.3 * X(i, 4) - 0.2 * X(i, 6) + 0.5 * rng.normal();
  }
  std::vector<int> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Eigen::MatrixXd Xp(120, 8);
  Eigen::VectorXd yp(120);
  for (int i = 0; i < 120; ++i) {
    Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
    yp(i) = y(perm[static_cast<std::size_t>(i)]);
  }
  EXPECT_EQ(ols::stepwise(X, y).columns, ols::stepwise(Xp, yp).columns);
}

TEST(OlsStepwise, SkipsCollinearCandidates) {
  Rng rng(5);
  Eigen::MatrixXd X(100, 3);
  Eigen::VectorXd y(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    X(i, 2) = X(i, 0) + X(i, 1);
    y(i) = X(i, 0) + X(i, 1) + 0.1 * rng.normal();
  }
  const auto m = ols::stepwise(X, y);
  EXPECT_FALSE(m.columns.empty());
  EXPECT_LT(m.columns.size(), 3u);
}

TEST(OlsStepwise, ConfigValidation) {
  ols::StepwiseConfig cfg;
  cfg.p_enter = 0.2;
  cfg.p_remove = 0.1;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = {};
  EXPECT_NO_THROW(cfg.validate());
}

TEST(OlsCorrelation, FlagsDuplicatesAndZeroVariance) {
  Rng rng(1);
  Eigen::MatrixXd X(50, 4);
  for (Eigen::Index i = 0; i < 50; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = X(i, 0);
    X(i, 2) = -X(i, 0) + 1e-9 * rng.normal();
    X(i, 3) = 2.0;
  }
  const auto r = ols::correlation_check(X);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_NEAR(r.pairs[0].r, 1.0, 1e-12);
  EXPECT_NEAR(r.pairs[1].r, -1.0, 1e-6);
  EXPECT_EQ(r.zero_variance, (std::vector<int>{3}));
  EXPECT_THROW(ols::correlation_check(X.topRows(1)), DataError);
}

TEST(OlsCorrelation, OrthogonalColumnsNotFlagged) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, -1, 1, 1, -1, -1, -1;
  EXPECT_TRUE(ols::correlation_check(X).pairs.empty());
}

TEST(OlsPredict, ArithmeticAndMissingColumns) {
  ols::Model m;
  m.intercept = 1.0;
  EXPECT_EQ(m.predict(std::vector<std::string>{"c"}, Eigen::VectorXd::Constant(1, 42.0)), 1.0);
  m.columns = {"c"};
  m.coefficients = {2.0};
  const std::vector<std::string> names = {"a", "c"};
  EXPECT_EQ(m.predict(names, Eigen::Vector2d(9.0, 3.0)), 7.0);
  EXPECT_THROW(m.predict(std::vector<std::string>{"a"}, Eigen::VectorXd::Constant(1, 3.0)), DataError);
  EXPECT_EQ(m.coefficient("c"), 2.0);
  EXPECT_EQ(m.coefficient("z"), 0.0);
}

TEST(OlsModel, JsonRoundTrip) {
  const auto pr = random_problem(4, 200, 6, 0.1);
  const auto m = ols::stepwise(pr.X, pr.y);
  const auto j = ols::to_json(m);
  EXPECT_EQ(j["kind"], "ols");
  const auto back = ols::model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.columns, m.columns);
  EXPECT_EQ(back.coefficients, m.coefficients);
  EXPECT_EQ(back.intercept, m.intercept);
  ASSERT_EQ(back.trace.size(), m.trace.size());
  for (std::size_t k = 0; k < m.trace.size(); ++k) EXPECT_EQ(back.trace[k].column, m.trace[k].column);
}
