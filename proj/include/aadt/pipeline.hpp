#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aadt/evaluation.hpp"
#include "aadt/model.hpp"

namespace aadt {

struct TrainConfig {
  Method method = Method::Svr;
  int alternative = 2;
  Scope scope = Scope::AllAtr;
  std::uint64_t seed = 42;
  double train_fraction = 2.0 / 3.0;

  // Hours kept by forward selection; 24 keeps every hour. Ignored by the
  // regression and factor methods.
  int sfs_hours = 20;
  // Rows used to fit SVR/ANN and to cross-validate SVR (seeded subsample;
  // 0 = all rows).
  std::size_t max_train_rows = 3000;
  std::size_t cv_rows = 800;

  svr::Params svr;
  svr::CvGrid grid = svr::CvGrid::standard();
  bool grid_search = true;  // false: use svr.C and svr.gamma as given

  ann::LmConfig lm;
  std::vector<int> hidden_candidates = {4, 8, 12, 16};

  ols::StepwiseConfig stepwise;
  double axle_correction = 1.0;

  SplitSpec split_spec() const { return {train_fraction, seed}; }
  void validate() const;  // UsageError
};

struct TrainOutput {
  ModelArtifact artifact;
  StationSplit split;
  std::optional<SfsResult> sfs;
  std::optional<svr::GridResult> cv;
  std::optional<std::vector<ann::HiddenCandidate>> hidden;
  std::optional<ann::TrainLog> ann_log;
};

// split -> assemble -> (SFS) -> train on the training stations of `corpus`.
// Errors carry the failing stage in their message.
TrainOutput train_pipeline(const CleanCorpus& corpus, const TrainConfig& cfg);

// Scores `trained` on the held-out stations of another corpus, using the
// split recorded in its manifest and skipping any station it was fitted on.
EvalReport cross_year_report(const ModelArtifact& trained, const CleanCorpus& validate_corpus,
                             const TruthMap* validate_truth = nullptr);

// Retrains on `train_corpus` and scores the held-out stations of
// `validate_corpus` (same split seed). Rejects identical corpora.
EvalReport cross_year(const CleanCorpus& train_corpus, const CleanCorpus& validate_corpus,
                      const TrainConfig& cfg, const TruthMap* validate_truth = nullptr);

}  // namespace aadt
