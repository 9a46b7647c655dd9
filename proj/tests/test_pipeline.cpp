#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "aadt/error.hpp"
#include "aadt/pipeline.hpp"
#include "support.hpp"

using namespace aadt;

namespace {

const CleanCorpus& small_corpus() {
  static const CleanCorpus c = [] {
    auto cfg = SynthConfig::standard();
    cfg.stations_per_class = {{FunctionalClass::InterstateExpressway, 4},
                              {FunctionalClass::PrincipalMinorArterial, 4}};
    return test::clean_corpus(generate(cfg));
  }();
  return c;
}

TrainConfig quick(Method m) {
  TrainConfig cfg;
  cfg.method = m;
  cfg.sfs_hours = 6;
  cfg.max_train_rows = 300;
  cfg.cv_rows = 150;
  cfg.grid = svr::CvGrid::powers(0, 4, -6, -2, 2);
  cfg.grid.folds = 3;
  cfg.hidden_candidates = {2, 3};
  cfg.lm.max_epochs = 15;
  return cfg;
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (auto m : {Method::Svr, Method::Ann, Method::Ols, Method::Factor})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_FALSE(parse_method("gbm"));
}

TEST(Pipeline, FactorRoutingSkipsFeatureSelection) {
  const auto out = train_pipeline(small_corpus(), quick(Method::Factor));
  EXPECT_EQ(out.artifact.method(), Method::Factor);
  EXPECT_FALSE(out.sfs.has_value());
  EXPECT_TRUE(out.artifact.selected_hours.empty());
  EXPECT_EQ(out.artifact.train_stations, out.split.train);
  EXPECT_EQ(out.artifact.manifest["method"], "factor");
}

TEST(Pipeline, SvrRecordsHyperparametersAndCvTable) {
  const auto out = train_pipeline(small_corpus(), quick(Method::Svr));
  ASSERT_TRUE(out.sfs.has_value());
  EXPECT_EQ(out.artifact.selected_hours.size(), 6u);
  ASSERT_TRUE(out.cv.has_value());
  EXPECT_EQ(out.cv->table.size(), 9u);
  const auto& hp = out.artifact.manifest["hyperparameters"];
  EXPECT_EQ(hp["C"].get<double>(), out.cv->best_C);
  EXPECT_EQ(hp["gamma"].get<double>(), out.cv->best_gamma);
  const auto r = evaluate(out.artifact, small_corpus(), out.split.test);
  EXPECT_TRUE(r.rmse_factor.has_value());
  EXPECT_LT(r.mape_aadt, 25.0);
}

TEST(Pipeline, SvrWithoutGridUsesGivenParameters) {
  auto cfg = quick(Method::Svr);
  cfg.grid_search = false;
  cfg.svr.C = 3.0;
  cfg.svr.gamma = 0.02;
  const auto out = train_pipeline(small_corpus(), cfg);
  EXPECT_FALSE(out.cv.has_value());
  EXPECT_EQ(std::get<svr::Model>(out.artifact.model).C, 3.0);
}

TEST(Pipeline, AnnHoldsOutValidationStations) {
  const auto out = train_pipeline(small_corpus(), quick(Method::Ann));
  ASSERT_TRUE(out.hidden.has_value());
  EXPECT_EQ(out.hidden->size(), 2u);
  const auto val = out.artifact.manifest["validation_stations"].get<std::vector<StationId>>();
  EXPECT_EQ(val.size(), 1u);
  EXPECT_NE(std::find(out.split.train.begin(), out.split.train.end(), val[0]), out.split.train.end());
}

TEST(Pipeline, OlsUsesRawCountsAndClassIndicators) {
  const auto out = train_pipeline(small_corpus(), quick(Method::Ols));
  EXPECT_EQ(out.artifact.alt.volume_form, VolumeForm::RawCounts);
  EXPECT_EQ(out.artifact.selected_hours.size(), 24u);
  const auto r = evaluate(out.artifact, small_corpus(), out.split.test);
  EXPECT_FALSE(r.rmse_factor.has_value());
}

TEST(Pipeline, DeterministicArtifacts) {
  for (auto m : {Method::Svr, Method::Ann, Method::Ols, Method::Factor}) {
    const auto a = train_pipeline(small_corpus(), quick(m)).artifact;
    const auto b = train_pipeline(small_corpus(), quick(m)).artifact;
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << to_string(m);
  }
}

TEST(Pipeline, SocioAlternativeRejectedOnAllScope) {
  auto cfg = quick(Method::Svr);
  cfg.alternative = 6;
  EXPECT_THROW(train_pipeline(small_corpus(), cfg), UsageError);
  cfg.train_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Pipeline, ErrorsNameTheStage) {
  auto cfg = quick(Method::Svr);
  cfg.svr.kkt_tol = 1e-14;
  cfg.svr.max_passes = 1;
  cfg.grid_search = false;
  try {
    train_pipeline(small_corpus(), cfg);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("train: ", 0), 0u) << e.what();
  }
}

TEST(Artifact, SaveLoadPreservesPredictions) {
  const auto dir = std::filesystem::temp_directory_path() / "aadt_artifact_test";
  std::filesystem::create_directories(dir);
  const auto& corpus = small_corpus();
  for (auto m : {Method::Svr, Method::Ann, Method::Ols, Method::Factor}) {
    const auto out = train_pipeline(corpus, quick(m));
    const auto path = dir / (std::string(to_string(m)) + ".json");
    save_artifact(path, out.artifact);
    const auto back = load_artifact(path);
    EXPECT_EQ(back.method(), m);
    EXPECT_EQ(back.selected_hours, out.artifact.selected_hours);
    const auto& s = corpus.station(out.split.test.front());
    for (std::size_t d = 0; d < 5; ++d) {
      const auto p = out.artifact.predict(s.days[d], &*s.meta);
      const auto q = back.predict(s.days[d], &*s.meta);
      EXPECT_NEAR(q.aadt, p.aadt, 1e-9 * p.aadt);
      EXPECT_NEAR(q.factor, p.factor, 1e-12);
    }
  }
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_THROW(load_artifact(dir / "broken.json"), DataError);
  EXPECT_THROW(load_artifact(dir / "absent.json"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Artifact, FactorNeedsMetadataAndDaysNeedTraffic) {
  const auto out = train_pipeline(small_corpus(), quick(Method::Factor));
  const auto& s = small_corpus().station(out.split.test.front());
  EXPECT_THROW(out.artifact.predict(s.days[0], nullptr), DataError);
  auto empty = s.days[0];
  for (auto& h : empty.hours) h = 0.0;
  EXPECT_THROW(out.artifact.predict(empty, &*s.meta), DataError);
}

TEST(CrossYear, RejectsIdenticalCorporaAndLabelsReport) {
  auto cfg = quick(Method::Factor);
  EXPECT_THROW(cross_year(small_corpus(), small_corpus(), cfg), DataError);
  auto other = SynthConfig::standard();
  other.stations_per_class = {{FunctionalClass::InterstateExpressway, 4},
                              {FunctionalClass::PrincipalMinorArterial, 4}};
  other.seed = 43;
  other.year = 2012;
  const auto validate = test::clean_corpus(generate(other));
  const auto r = cross_year(small_corpus(), validate, cfg);
  EXPECT_EQ(r.label, "cross-year");
  ASSERT_EQ(r.corpus_ids.size(), 2u);
  EXPECT_NE(r.corpus_ids[0], r.corpus_ids[1]);
  EXPECT_LT(r.mape_aadt, 25.0);
}
