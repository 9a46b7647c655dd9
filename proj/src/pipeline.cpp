#include "aadt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "aadt/error.hpp"
#include "aadt/rng.hpp"

namespace aadt {
namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(name) + ": ";
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  }
}

std::vector<Eigen::Index> subsample_rows(Eigen::Index n, std::size_t k, std::uint64_t seed,
                                         std::uint64_t stream) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (k == 0 || k >= rows.size()) return rows;
  auto rng = Rng::substream(seed, "subsample", stream);
  rng.shuffle(rows);
  rows.resize(k);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<int> all_hours() {
  std::vector<int> h(24);
  std::iota(h.begin(), h.end(), 0);
  return h;
}

std::vector<int> select_hours(const CleanCorpus& corpus, const AlternativeSpec& alt,
                              const std::vector<StationId>& stations, const TrainConfig& cfg,
                              std::optional<SfsResult>& record) {
  if (cfg.sfs_hours >= 24) return all_hours();
  const auto hours = all_hours();
  const auto m = assemble(corpus, alt, hours, TargetKind::AadtFactor, {.stations = stations});
  if (m.rows() == 0) throw DataError("no training rows");
  record = sfs(m.X.leftCols(24), m.target, cfg.sfs_hours);
  return record->order;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
  return out;
}

void train_svr(const CleanCorpus& corpus, const TrainConfig& cfg, TrainOutput& out) {
  auto& a = out.artifact;
  const auto m = stage("assemble", [&] {
    return assemble(corpus, a.alt, a.selected_hours, TargetKind::AadtFactor, {.stations = out.split.train});
  });
  if (m.rows() == 0) throw DataError("assemble: no training rows");
  const auto rows = subsample_rows(m.rows(), cfg.max_train_rows, cfg.seed, 0);
  const Eigen::MatrixXd X = rows_of(m.X, rows);
  const Eigen::VectorXd y = rows_of(m.target, rows);

  svr::Params p = cfg.svr;
  if (cfg.grid_search) {
    const auto cv_local = subsample_rows(X.rows(), cfg.cv_rows, cfg.seed, 1);
    std::vector<std::string> groups;
    for (auto r : cv_local) groups.push_back(m.station[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])]);
    auto grid = cfg.grid;
    grid.seed = cfg.seed;
    out.cv = stage("cross-validation",
                   [&] { return svr::grid_search(rows_of(X, cv_local), rows_of(y, cv_local), groups, grid, p); });
    p.C = out.cv->best_C;
    p.gamma = out.cv->best_gamma;
  }
  a.model = stage("train", [&] { return svr::train(X, y, p, m.columns); });
  a.manifest["hyperparameters"] = {{"C", p.C}, {"gamma", p.gamma}, {"epsilon", p.epsilon}, {"kkt_tol", p.kkt_tol}};
  a.manifest["rows"] = {{"available", m.rows()}, {"fitted", X.rows()}};
}

void train_ann(const CleanCorpus& corpus, const TrainConfig& cfg, TrainOutput& out) {
  auto& a = out.artifact;
  auto pool = out.split.train;
  if (pool.size() < 2) throw DataError("split: the neural network needs at least two training stations");
  std::sort(pool.begin(), pool.end());
  auto rng = Rng::substream(cfg.seed, "validation");
  rng.shuffle(pool);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(pool.size() / 6.0)));
  std::vector<StationId> val(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<StationId> fit(pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());

  auto build = [&](const std::vector<StationId>& st, std::uint64_t stream) {
    const auto m = assemble(corpus, a.alt, a.selected_hours, TargetKind::AadtFactor, {.stations = st});
    if (m.rows() == 0) throw DataError("no rows for the neural network");
    const auto rows = subsample_rows(m.rows(), cfg.max_train_rows, cfg.seed, stream);
    return std::make_pair(ann::Dataset{rows_of(m.X, rows), rows_of(m.target, rows)}, m.columns);
  };
  const auto [train_set, columns] = stage("assemble", [&] { return build(fit, 2); });
  const auto val_set = stage("assemble", [&] { return build(val, 3).first; });

  auto lm = cfg.lm;
  lm.seed = cfg.seed;
  auto search = stage("train", [&] { return ann::pick_hidden(cfg.hidden_candidates, train_set, val_set, lm, columns); });
  a.model = std::move(search.best.model);
  out.hidden = search.table;
  out.ann_log = search.best.log;
  a.manifest["hyperparameters"] = {{"n_hidden", search.best_hidden}, {"mu0", lm.mu0}, {"max_epochs", lm.max_epochs},
                                   {"patience", lm.patience}};
  a.manifest["validation_stations"] = val;
  a.manifest["rows"] = {{"fitted", train_set.X.rows()}, {"validation", val_set.X.rows()}};
}

void train_ols(const CleanCorpus& corpus, const TrainConfig& cfg, TrainOutput& out) {
  auto& a = out.artifact;
  const auto m = stage("assemble", [&] {
    return assemble(corpus, a.alt, a.selected_hours, TargetKind::Aadt,
                    {.stations = out.split.train, .class_indicators = cfg.scope == Scope::AllAtr});
  });
  if (m.rows() == 0) throw DataError("assemble: no training rows");
  a.model = stage("train", [&] { return ols::stepwise(m.X, m.target, cfg.stepwise, m.columns); });
  a.manifest["hyperparameters"] = {{"p_enter", cfg.stepwise.p_enter}, {"p_remove", cfg.stepwise.p_remove}};
  a.manifest["rows"] = {{"fitted", m.rows()}};
}

}  // namespace

void TrainConfig::validate() const {
  if (alternative < 1 || alternative > 9) throw UsageError("alternative must lie in 1..9");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("train_fraction must lie in (0,1)");
  if (sfs_hours < 1 || sfs_hours > 24) throw UsageError("sfs_hours must lie in 1..24");
  if (hidden_candidates.empty()) throw UsageError("at least one hidden-size candidate is required");
  for (int h : hidden_candidates)
    if (h < 1) throw UsageError("hidden-size candidates must be >= 1");
  if (!(axle_correction > 0.0)) throw UsageError("axle_correction must be > 0");
  if (!(svr.C > 0.0 && svr.gamma > 0.0 && svr.epsilon >= 0.0 && svr.kkt_tol > 0.0))
    throw UsageError("SVR parameters must be positive (epsilon may be 0)");
  lm.validate();
  stepwise.validate();
  (void)aadt::alternative(alternative, scope);
}

TrainOutput train_pipeline(const CleanCorpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  TrainOutput out;
  auto& a = out.artifact;
  a.alt = aadt::alternative(cfg.alternative, cfg.scope);
  out.split = stage("split", [&] { return split(corpus, cfg.scope, cfg.split_spec()); });
  if (out.split.train.empty()) throw DataError("split: no training stations");
  if (out.split.test.empty()) throw DataError("split: no test stations");
  a.train_stations = out.split.train;

  a.manifest = {{"method", std::string(to_string(cfg.method))},
                {"alternative", cfg.alternative},
                {"scope", std::string(to_string(cfg.scope))},
                {"seed", cfg.seed},
                {"train_fraction", cfg.train_fraction},
                {"corpus_hash", hex64(corpus.content_hash())},
                {"train_hash", station_set_hash(out.split.train)},
                {"test_hash", station_set_hash(out.split.test)}};

  switch (cfg.method) {
    case Method::Factor:
      a.model = stage("train", [&] { return factor::build_factors(corpus, out.split.train, cfg.axle_correction); });
      a.manifest["hyperparameters"] = {{"axle_correction", cfg.axle_correction}};
      break;
    case Method::Ols:
      a.alt.volume_form = VolumeForm::RawCounts;
      a.selected_hours = all_hours();
      train_ols(corpus, cfg, out);
      break;
    case Method::Svr:
    case Method::Ann:
      a.selected_hours = stage("feature selection",
                               [&] { return select_hours(corpus, a.alt, out.split.train, cfg, out.sfs); });
      if (cfg.method == Method::Svr) train_svr(corpus, cfg, out);
      else train_ann(corpus, cfg, out);
      break;
  }
  a.manifest["selected_hours"] = a.selected_hours;
  return out;
}

EvalReport cross_year_report(const ModelArtifact& trained, const CleanCorpus& validate_corpus,
                             const TruthMap* validate_truth) {
  const auto& m = trained.manifest;
  if (!m.contains("corpus_hash") || !m.contains("seed") || !m.contains("train_fraction"))
    throw DataError("cross-year: model manifest lacks its training corpus and split");
  const auto train_hash = m.at("corpus_hash").get<std::string>();
  const auto validate_hash = hex64(validate_corpus.content_hash());
  if (train_hash == validate_hash)
    throw DataError("cross-year validation needs two different corpora; both inputs are identical");
  const SplitSpec spec{m.at("train_fraction").get<double>(), m.at("seed").get<std::uint64_t>()};
  const std::set<StationId> used(trained.train_stations.begin(), trained.train_stations.end());
  std::vector<StationId> test;
  for (const auto& s : split(validate_corpus, trained.alt.scope, spec).test)
    if (!used.count(s)) test.push_back(s);
  if (test.empty()) throw DataError("cross-year: every held-out station of the validation corpus was used for training");
  auto report = evaluate(trained, validate_corpus, test, validate_truth);
  report.label = "cross-year";
  report.corpus_ids = {train_hash, validate_hash};
  return report;
}

EvalReport cross_year(const CleanCorpus& train_corpus, const CleanCorpus& validate_corpus, const TrainConfig& cfg,
                      const TruthMap* validate_truth) {
  if (train_corpus.content_hash() == validate_corpus.content_hash())
    throw DataError("cross-year validation needs two different corpora; both inputs are identical");
  return cross_year_report(train_pipeline(train_corpus, cfg).artifact, validate_corpus, validate_truth);
}

}  // namespace aadt
