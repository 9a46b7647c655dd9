#include <gtest/gtest.h>

#include <cmath>

#include "aadt/error.hpp"
#include "aadt/factor.hpp"
#include "aadt/features.hpp"
#include "support.hpp"

using namespace aadt;

namespace {

CleanCorpus uniform_corpus() {
  std::vector<DayCount> records;
  for (const auto& d : test::flat_year("A", 2011, 100)) records.push_back(d);
  for (const auto& d : test::flat_year("B", 2011, 40)) records.push_back(d);
  return join_meta(clean(records), {test::meta_for("A", FunctionalClass::InterstateExpressway),
                                    test::meta_for("B", FunctionalClass::InterstateExpressway)});
}

}  // namespace

TEST(FactorBuild, UniformCorpusGivesUnitFactors) {
  const auto t = factor::build_factors(uniform_corpus());
  const auto& g = t.group(FunctionalClass::InterstateExpressway);
  for (double f : g.monthly) EXPECT_NEAR(f, 1.0, 1e-9);
  EXPECT_EQ(g.stations, (std::vector<StationId>{"A", "B"}));
  EXPECT_THROW(t.group(FunctionalClass::Local), DataError);
}

TEST(FactorBuild, ExactCorpusRecoversPlantedMonthlyFactors) {
  auto cfg = test::exact_config(2);
  cfg.monthly_factors[0] = 0.8;
  const double shift = (1.0 - 0.8) / 11.0;
  for (std::size_t m = 1; m < 12; ++m) cfg.monthly_factors[m] = 1.0 + shift;
  const auto synth = generate(cfg);
  const auto t = factor::build_factors(test::clean_corpus(synth));
  for (const auto& [fc, g] : t.groups) {
    EXPECT_NEAR(g.monthly[0], 1.25, 1e-9);
    for (std::size_t m = 0; m < 12; ++m) EXPECT_NEAR(g.monthly[m], 1.0 / cfg.monthly_factors[m], 1e-9);
  }
}

TEST(FactorBuild, NoisyCorpusWithinThreePercent) {
  auto cfg = SynthConfig::standard(0.20, 0.0);
  cfg.seed = 42;
  const auto synth = generate(cfg);
  const auto t = factor::build_factors(test::clean_corpus(synth));
  for (const auto& [fc, g] : t.groups)
    for (std::size_t m = 0; m < 12; ++m)
      EXPECT_NEAR(g.monthly[m] * synth.truth.monthly_factors[m], 1.0, 0.03);
}

TEST(FactorBuild, MonthWithoutDataIsNamed) {
  std::vector<DayCount> records;
  for (const auto& d : test::flat_year("A", 2011, 100))
    if (month_index(d.date) != 3) records.push_back(d);
  const auto c = join_meta(clean(records), {test::meta_for("A", FunctionalClass::Collector)});
  try {
    factor::build_factors(c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("April"), std::string::npos) << e.what();
  }
  EXPECT_THROW(factor::build_factors(uniform_corpus(), {}, 0.0), UsageError);
}

TEST(FactorEstimate, Arithmetic) {
  factor::FactorTable t;
  factor::GroupFactors g;
  g.monthly.fill(1.0);
  g.monthly[4] = 1.25;
  t.groups[FunctionalClass::Collector] = g;
  const auto day = test::flat_day("X", test::ymd(2011, 5, 10), 10000.0 / 24.0);
  EXPECT_NEAR(factor::estimate(day, t, FunctionalClass::Collector), 12500.0, 1e-9);
  const auto june = test::flat_day("X", test::ymd(2011, 6, 10), 10000.0 / 24.0);
  EXPECT_NEAR(factor::estimate(june, t, FunctionalClass::Collector), 10000.0, 1e-9);
  t.axle_correction = 0.9;
  EXPECT_NEAR(factor::estimate(day, t, FunctionalClass::Collector), 11250.0, 1e-9);
  EXPECT_THROW(factor::estimate(day, t, FunctionalClass::Local), DataError);
  const auto bigger = test::flat_day("X", test::ymd(2011, 5, 10), 500.0);
  EXPECT_GT(factor::estimate(bigger, t, FunctionalClass::Collector), factor::estimate(day, t, FunctionalClass::Collector));
}

TEST(FactorEstimate, ExactCorpusDayEstimatesWithinHalfPercent) {
  const auto synth = generate(test::exact_config(3));
  const auto corpus = test::clean_corpus(synth);
  const auto t = factor::build_factors(corpus);
  for (const auto& [id, s] : corpus.stations()) {
    const double truth = synth.truth.find(id)->true_aadt;
    double ratio_sum = 0.0;
    for (const auto& d : s.days) {
      const double e = factor::estimate(d, t, s.meta->functional_class);
      EXPECT_LT(std::abs(e - truth) / truth, 0.005);
      ratio_sum += e / truth;
    }
    EXPECT_LT(std::abs(ratio_sum / static_cast<double>(s.days.size()) - 1.0), 0.01);
  }
}

TEST(FactorEstimate, HomogeneousUnderVolumeScaling) {
  const auto synth = generate(test::exact_config(2));
  auto scaled = synth;
  for (auto& d : scaled.counts)
    for (auto& h : d.hours)
      if (h) *h *= 3.0;
  const auto a = factor::build_factors(test::clean_corpus(synth));
  const auto b = factor::build_factors(test::clean_corpus(scaled));
  for (const auto& [fc, g] : a.groups)
    for (std::size_t m = 0; m < 12; ++m) EXPECT_NEAR(b.group(fc).monthly[m], g.monthly[m], 1e-12);
  const auto& day = synth.counts.front();
  const auto& big = scaled.counts.front();
  const auto fc = FunctionalClass::InterstateExpressway;
  EXPECT_NEAR(factor::estimate(big, b, fc), 3.0 * factor::estimate(day, a, fc), 1e-9);
}

TEST(FactorTable, JsonRoundTrip) {
  const auto t = factor::build_factors(test::clean_corpus(generate(test::exact_config(2))), {}, 1.1);
  const auto j = factor::to_json(t);
  EXPECT_EQ(j["kind"], "factor");
  const auto back = factor::table_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.axle_correction, 1.1);
  for (const auto& [fc, g] : t.groups) {
    EXPECT_EQ(back.group(fc).monthly, g.monthly);
    EXPECT_EQ(back.group(fc).stations, g.stations);
  }
  auto bad = j;
  bad["groups"].begin().value()["monthly"][0] = -1.0;
  EXPECT_THROW(factor::table_from_json(bad), DataError);
}
