#include "aadt/cli.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "aadt/error.hpp"
#include "aadt/evaluation.hpp"
#include "aadt/pipeline.hpp"
#include "aadt/synth.hpp"
#include "csv.hpp"

namespace aadt::cli {
namespace {

namespace fs = std::filesystem;

struct CorpusOptions {
  std::string counts;
  std::string meta;
  std::string truth;
  int max_missing_months = 6;
};

struct SynthOptions {
  std::string out = "synth";
  std::uint64_t seed = 42;
  int interstate = 30;
  int arterial = 30;
  int collector = 0;
  int local = 0;
  double noise = 0.1;
  double monthly_amp = 0.20;
  double dow_amp = 0.15;
  double missing_day_rate = 0.0;
  double missing_hour_rate = 0.0;
  double socio_link = 0.0;
  int year = 2011;
  std::string mode = "realistic";
};

struct TrainOptions {
  CorpusOptions corpus;
  std::string out = "model";
  std::uint64_t seed = 42;
  std::string method = "svr";
  int alternative = 2;
  std::string scope = "all";
  double train_fraction = 2.0 / 3.0;
  int sfs_hours = 20;
  std::size_t max_train_rows = 3000;
  std::size_t cv_rows = 800;
  double svr_c = 0.0;
  double svr_gamma = 0.0;
  double svr_epsilon = 0.01;
  double kkt_tol = 1e-3;
  int c_min = -3, c_max = 15, gamma_min = -15, gamma_max = 3, grid_step = 1, folds = 5;
  std::vector<int> hidden = {4, 8, 12, 16};
  int max_epochs = 200;
  int patience = 6;
  double p_enter = 0.001;
  double p_remove = 0.01;
  double axle = 1.0;
};

struct EvaluateOptions {
  CorpusOptions corpus;
  std::string model;
  std::string out = "report";
  std::vector<std::string> stations;
  int short_count = 0;
  std::size_t cases = 5;
  bool cross_year = false;
  std::uint64_t seed = 42;
};

struct CompareOptions {
  std::vector<std::string> reports;
  std::string out = "comparison";
};

struct PredictOptions {
  std::string model;
  std::string counts;
  std::string meta;
  std::string out;
  bool short_count = false;
};

struct CoverageOptions {
  std::string counts;
  std::string out;
};

void ensure_exists(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw DataError(std::string(what) + " file '" + path + "' does not exist");
}

std::ifstream open_in(const std::string& path, const char* what) {
  ensure_exists(path, what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot read ") + what + " file '" + path + "'");
  return in;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir.string() + "'");
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void report_diagnostics(const std::string& path, const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const auto& d : diags) err << "warning: " << path << ':' << d.line << ": " << d.message << '\n';
}

std::vector<DayCount> read_counts(const std::string& path, std::ostream& err) {
  auto in = open_in(path, "counts");
  auto parsed = parse_counts(in);
  report_diagnostics(path, parsed.diagnostics, err);
  return std::move(parsed.rows);
}

CleanCorpus load_corpus(const CorpusOptions& o, std::ostream& err) {
  auto corpus = clean(read_counts(o.counts, err), o.max_missing_months);
  if (!o.meta.empty()) {
    auto in = open_in(o.meta, "metadata");
    auto parsed = parse_meta(in);
    report_diagnostics(o.meta, parsed.diagnostics, err);
    corpus = join_meta(corpus, parsed.rows);
  }
  return corpus;
}

std::optional<TruthMap> load_truth(const std::string& path) {
  if (path.empty()) return std::nullopt;
  auto in = open_in(path, "truth");
  return read_truth(in);
}

nlohmann::json input_entry(const std::string& path) {
  if (path.empty()) return nullptr;
  return {{"path", path}, {"sha256", sha256_file(path)}};
}

void add_corpus_options(CLI::App* cmd, CorpusOptions& o, bool with_truth) {
  cmd->add_option("--counts", o.counts, "Hourly count CSV")->required();
  cmd->add_option("--meta", o.meta, "Station metadata CSV");
  if (with_truth) cmd->add_option("--truth", o.truth, "Ground-truth CSV (station_id,true_aadt)");
  cmd->add_option("--max-missing-months", o.max_missing_months, "Drop stations missing more months than this")
      ->capture_default_str();
}

template <class E>
E checked(std::optional<E> v, const std::string& what, const std::string& text) {
  if (!v) throw UsageError("unknown " + what + " '" + text + "'");
  return *v;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  auto cfg = SynthConfig::standard(o.monthly_amp, o.dow_amp);
  cfg.stations_per_class = {{FunctionalClass::InterstateExpressway, o.interstate},
                            {FunctionalClass::PrincipalMinorArterial, o.arterial},
                            {FunctionalClass::Collector, o.collector},
                            {FunctionalClass::Local, o.local}};
  cfg.noise_sigma = o.noise;
  cfg.missing_day_rate = o.missing_day_rate;
  cfg.missing_hour_rate = o.missing_hour_rate;
  cfg.socio_aadt_link = o.socio_link;
  cfg.year = o.year;
  cfg.seed = o.seed;
  if (o.mode == "exact") cfg.mode = SynthMode::Exact;
  else if (o.mode == "realistic") cfg.mode = SynthMode::Realistic;
  else throw UsageError("unknown synth mode '" + o.mode + "'");

  const auto corpus = generate(cfg);
  const fs::path dir(o.out);
  make_dir(dir);
  write_file(dir / "counts.csv", [&](std::ostream& s) { write_counts(s, corpus.counts); });
  write_file(dir / "meta.csv", [&](std::ostream& s) { write_meta(s, corpus.meta); });
  write_file(dir / "truth.csv", [&](std::ostream& s) { write_truth(s, corpus.truth); });

  std::size_t incomplete = 0;
  for (const auto& d : corpus.counts) incomplete += d.complete() ? 0 : 1;
  out << "stations      " << corpus.truth.stations.size() << '\n'
      << "station-days  " << corpus.counts.size() << " (" << incomplete << " incomplete)\n"
      << "year          " << cfg.year << '\n'
      << "seed          " << cfg.seed << '\n';
  for (const char* f : {"counts.csv", "meta.csv", "truth.csv"})
    out << "wrote         " << (dir / f).string() << "  sha256 " << sha256_file((dir / f).string()) << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

std::string quoted(const std::string& v) { return '"' + v + '"'; }

// Re-runnable [train] section; the output directory is left to the caller.
std::string train_ini(const TrainOptions& o) {
  std::ostringstream s;
  const auto d = [](double v) { return csv::format_double(v); };
  s << "[train]\n"
    << "counts=" << quoted(o.corpus.counts) << '\n'
    << "meta=" << quoted(o.corpus.meta) << '\n'
    << "max-missing-months=" << o.corpus.max_missing_months << '\n'
    << "seed=" << o.seed << '\n'
    << "method=" << quoted(o.method) << '\n'
    << "alternative=" << o.alternative << '\n'
    << "scope=" << quoted(o.scope) << '\n'
    << "train-fraction=" << d(o.train_fraction) << '\n'
    << "sfs-hours=" << o.sfs_hours << '\n'
    << "max-train-rows=" << o.max_train_rows << '\n'
    << "cv-rows=" << o.cv_rows << '\n'
    << "svr-c=" << d(o.svr_c) << '\n'
    << "svr-gamma=" << d(o.svr_gamma) << '\n'
    << "svr-epsilon=" << d(o.svr_epsilon) << '\n'
    << "kkt-tol=" << d(o.kkt_tol) << '\n'
    << "c-min=" << o.c_min << '\n'
    << "c-max=" << o.c_max << '\n'
    << "gamma-min=" << o.gamma_min << '\n'
    << "gamma-max=" << o.gamma_max << '\n'
    << "grid-step=" << o.grid_step << '\n'
    << "folds=" << o.folds << '\n'
    << "hidden=[";
  for (std::size_t k = 0; k < o.hidden.size(); ++k) s << (k ? "," : "") << o.hidden[k];
  s << "]\n"
    << "max-epochs=" << o.max_epochs << '\n'
    << "patience=" << o.patience << '\n'
    << "p-enter=" << d(o.p_enter) << '\n'
    << "p-remove=" << d(o.p_remove) << '\n'
    << "axle=" << d(o.axle) << '\n';
  return s.str();
}

TrainConfig train_config(const TrainOptions& o) {
  TrainConfig c;
  c.method = checked(parse_method(o.method), "method", o.method);
  c.scope = checked(parse_scope(o.scope), "scope", o.scope);
  c.alternative = o.alternative;
  c.seed = o.seed;
  c.train_fraction = o.train_fraction;
  c.sfs_hours = o.sfs_hours;
  c.max_train_rows = o.max_train_rows;
  c.cv_rows = o.cv_rows;
  c.svr.epsilon = o.svr_epsilon;
  c.svr.kkt_tol = o.kkt_tol;
  if (o.svr_c > 0.0 || o.svr_gamma > 0.0) {
    if (!(o.svr_c > 0.0 && o.svr_gamma > 0.0)) throw UsageError("--svr-c and --svr-gamma must be given together");
    c.svr.C = o.svr_c;
    c.svr.gamma = o.svr_gamma;
    c.grid_search = false;
  }
  if (o.grid_step < 1) throw UsageError("--grid-step must be >= 1");
  if (o.c_min > o.c_max || o.gamma_min > o.gamma_max) throw UsageError("grid bounds are inverted");
  if (o.folds < 2) throw UsageError("--folds must be >= 2");
  c.grid = svr::CvGrid::powers(o.c_min, o.c_max, o.gamma_min, o.gamma_max, o.grid_step);
  c.grid.folds = o.folds;
  c.hidden_candidates = o.hidden;
  c.lm.max_epochs = o.max_epochs;
  c.lm.patience = o.patience;
  c.stepwise.p_enter = o.p_enter;
  c.stepwise.p_remove = o.p_remove;
  c.axle_correction = o.axle;
  c.validate();
  return c;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const auto cfg = train_config(o);
  const auto corpus = load_corpus(o.corpus, err);
  auto result = train_pipeline(corpus, cfg);
  auto& artifact = result.artifact;

  const fs::path dir(o.out);
  make_dir(dir);
  artifact.manifest["command"] = "train";
  artifact.manifest["inputs"] = {{"counts", input_entry(o.corpus.counts)}, {"meta", input_entry(o.corpus.meta)}};
  artifact.manifest["max_missing_months"] = o.corpus.max_missing_months;
  artifact.manifest["config"] = train_ini(o);

  nlohmann::json files = {{"model", "model.json"}, {"config", "run.ini"}};
  write_file(dir / "run.ini", [&](std::ostream& s) { s << train_ini(o); });
  if (result.sfs) {
    files["sfs"] = "sfs.csv";
    write_file(dir / "sfs.csv", [&](std::ostream& s) {
      s << "step,hour,rss\n";
      for (std::size_t k = 0; k < result.sfs->order.size(); ++k)
        s << k + 1 << ',' << result.sfs->order[k] << ',' << csv::format_double(result.sfs->rss_path[k]) << '\n';
    });
  }
  if (result.cv) {
    files["cv_table"] = "cv_table.csv";
    write_file(dir / "cv_table.csv", [&](std::ostream& s) {
      s << "C,gamma,cv_rmse,failure\n";
      for (const auto& c : result.cv->table)
        s << csv::format_double(c.C) << ',' << csv::format_double(c.gamma) << ','
          << (c.rmse ? csv::format_double(*c.rmse) : std::string()) << ',' << c.failure << '\n';
    });
    artifact.manifest["cv"] = {{"best_C", result.cv->best_C},
                               {"best_gamma", result.cv->best_gamma},
                               {"best_rmse", result.cv->best_rmse},
                               {"table", "cv_table.csv"}};
  }
  if (result.hidden) {
    files["hidden_table"] = "hidden_table.csv";
    write_file(dir / "hidden_table.csv", [&](std::ostream& s) {
      s << "n_hidden,validation_rmse,train_sse,epochs,failure\n";
      for (const auto& h : *result.hidden)
        s << h.n_hidden << ',' << (h.validation_rmse ? csv::format_double(*h.validation_rmse) : std::string())
          << ',' << csv::format_double(h.train_sse) << ',' << h.epochs << ',' << h.failure << '\n';
    });
  }
  if (result.ann_log) {
    files["train_log"] = "train_log.csv";
    write_file(dir / "train_log.csv", [&](std::ostream& s) {
      s << "epoch,mu,sse,accepted\n";
      for (const auto& a : result.ann_log->attempts)
        s << a.epoch << ',' << csv::format_double(a.mu) << ',' << csv::format_double(a.sse) << ','
          << (a.accepted ? 1 : 0) << '\n';
    });
    artifact.manifest["stop_reason"] = result.ann_log->stop_reason;
  }
  artifact.manifest["files"] = files;
  save_artifact(dir / "model.json", artifact);

  auto manifest = artifact.manifest;
  manifest["model_sha256"] = sha256_file((dir / "model.json").string());
  write_file(dir / "manifest.json", [&](std::ostream& s) { s << manifest.dump(2) << '\n'; });

  out << "method        " << o.method << " (alternative " << o.alternative << ", scope " << o.scope << ")\n"
      << "stations      " << result.split.train.size() << " train / " << result.split.test.size() << " test\n";
  if (!artifact.selected_hours.empty() && artifact.method() != Method::Ols) {
    out << "hours         ";
    for (std::size_t k = 0; k < artifact.selected_hours.size(); ++k)
      out << (k ? "," : "") << artifact.selected_hours[k];
    out << '\n';
  }
  if (artifact.manifest.contains("hyperparameters"))
    out << "parameters    " << artifact.manifest["hyperparameters"].dump() << '\n';
  out << "wrote         " << (dir / "model.json").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  ensure_exists(o.model, "model");
  const auto artifact = load_artifact(o.model);
  const auto corpus = load_corpus(o.corpus, err);
  const auto truth = load_truth(o.corpus.truth);
  const TruthMap* truth_ptr = truth ? &*truth : nullptr;

  EvalReport report;
  std::string stem = "report";
  if (o.cross_year) {
    if (!o.stations.empty()) throw UsageError("--stations cannot be combined with --cross-year");
    report = cross_year_report(artifact, corpus, truth_ptr);
    stem = "cross_year";
  } else {
    std::vector<StationId> test = o.stations;
    if (test.empty()) {
      const auto& m = artifact.manifest;
      if (!m.contains("seed") || !m.contains("train_fraction"))
        throw DataError("model manifest lacks its split; pass --stations");
      test = split(corpus, artifact.alt.scope, {m.at("train_fraction").get<double>(), m.at("seed").get<std::uint64_t>()})
                 .test;
    }
    if (o.short_count > 0) {
      const auto chosen = sample_stations(test, o.cases, o.seed);
      const auto cases = make_short_count_cases(corpus, chosen, o.short_count, o.seed, truth_ptr);
      report = short_count(cases, artifact, corpus);
      stem = "short_count";
    } else {
      report = evaluate(artifact, corpus, test, truth_ptr);
    }
  }

  const fs::path dir(o.out);
  make_dir(dir);
  write_file(dir / (stem + ".json"), [&](std::ostream& s) { s << to_json(report).dump(2) << '\n'; });
  write_file(dir / (stem + ".txt"), [&](std::ostream& s) { write_text(s, report); });
  write_text(out, report);
  return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  if (o.reports.size() < 2) throw UsageError("compare needs at least two report files");
  std::vector<EvalReport> reports;
  for (const auto& path : o.reports) {
    auto in = open_in(path, "report");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("report '" + path + "' is not valid JSON: " + e.what());
    }
    try {
      reports.push_back(report_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("report '" + path + "' is malformed: " + e.what());
    }
  }
  const auto table = compare(reports);
  const fs::path dir(o.out);
  make_dir(dir);
  write_file(dir / "comparison.csv", [&](std::ostream& s) { write_csv(s, table); });
  write_file(dir / "comparison.txt", [&](std::ostream& s) { write_text(s, table); });
  write_text(out, table);
  return 0;
}

// ---------------------------------------------------------------- predict

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  ensure_exists(o.model, "model");
  const auto artifact = load_artifact(o.model);
  auto in = open_in(o.counts, "counts");
  auto parsed = parse_counts(in);
  report_diagnostics(o.counts, parsed.diagnostics, err);
  if (parsed.rows.empty()) throw DataError("no count rows in '" + o.counts + "'");

  std::map<StationId, StationMeta> meta;
  if (!o.meta.empty()) {
    auto min = open_in(o.meta, "metadata");
    auto pm = parse_meta(min);
    report_diagnostics(o.meta, pm.diagnostics, err);
    for (auto& m : pm.rows) meta.emplace(m.station, std::move(m));
  }

  std::map<StationId, std::vector<DayCount>> by_station;
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    const auto& day = parsed.rows[i];
    if (!day.complete()) {
      err << "warning: " << o.counts << ": skipping incomplete day " << day.station << ' ' << format_date(day.date)
          << '\n';
      continue;
    }
    if (!(day.total() > 0.0)) {
      err << "warning: " << o.counts << ": skipping zero-total day " << day.station << ' ' << format_date(day.date)
          << '\n';
      continue;
    }
    by_station[day.station].push_back(day);
  }
  if (by_station.empty()) throw DataError("no complete days to predict from");

  std::ostringstream csv_out;
  csv_out << "station_id,date,predicted_aadt\n";
  for (auto& [station, days] : by_station) {
    std::sort(days.begin(), days.end(), [](const DayCount& a, const DayCount& b) { return a.date < b.date; });
    if (o.short_count) ShortCountCase{station, days, 1.0}.validate();
    const auto it = meta.find(station);
    const StationMeta* m = it == meta.end() ? nullptr : &it->second;
    double sum = 0.0;
    for (const auto& day : days) {
      const double est = artifact.predict(day, m).aadt;
      sum += est;
      csv_out << station << ',' << format_date(day.date) << ',' << csv::format_double(est) << '\n';
    }
    csv_out << station << ",mean," << csv::format_double(sum / static_cast<double>(days.size())) << '\n';
  }
  if (o.out.empty()) {
    out << csv_out.str();
  } else {
    write_file(o.out, [&](std::ostream& s) { s << csv_out.str(); });
  }
  return 0;
}

// ---------------------------------------------------------------- coverage

int cmd_coverage(const CoverageOptions& o, std::ostream& out, std::ostream& err) {
  const auto rows = read_counts(o.counts, err);
  if (rows.empty()) throw DataError("no count rows in '" + o.counts + "'");
  const auto report = coverage_report(rows);
  std::ostringstream csv_out;
  csv_out << "missing_months,stations\n";
  for (std::size_t k = 0; k < report.buckets.size(); ++k) csv_out << k << ',' << report.buckets[k] << '\n';
  out << "year " << report.year << ", " << report.station_count() << " stations\n";
  out << "missing_months  stations\n";
  for (std::size_t k = 0; k < report.buckets.size(); ++k) {
    char line[64];
    std::snprintf(line, sizeof line, "%14zu  %8zu\n", k, report.buckets[k]);
    out << line;
  }
  if (!o.out.empty()) write_file(o.out, [&](std::ostream& s) { s << csv_out.str(); });
  return 0;
}

int exit_code_of(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 1;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  return 2;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "' for checksum");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"AADT estimation from short-term traffic counts", "aadt"};
  app.set_config("--config", "", "INI/TOML file; sections name subcommands, keys name flags");
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with known AADT");
  synth->add_option("--out", so.out, "Output directory")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--interstate", so.interstate, "Interstate/expressway stations")->capture_default_str();
  synth->add_option("--arterial", so.arterial, "Arterial stations")->capture_default_str();
  synth->add_option("--collector", so.collector, "Collector stations")->capture_default_str();
  synth->add_option("--local", so.local, "Local-road stations")->capture_default_str();
  synth->add_option("--noise", so.noise, "Lognormal hourly noise shape")->capture_default_str();
  synth->add_option("--monthly-amp", so.monthly_amp, "Monthly factor amplitude")->capture_default_str();
  synth->add_option("--dow-amp", so.dow_amp, "Day-of-week factor amplitude")->capture_default_str();
  synth->add_option("--missing-day-rate", so.missing_day_rate, "Probability a day is missing")->capture_default_str();
  synth->add_option("--missing-hour-rate", so.missing_hour_rate, "Probability an hour is missing")
      ->capture_default_str();
  synth->add_option("--socio-link", so.socio_link, "Link of socio attributes to AADT, 0..1")->capture_default_str();
  synth->add_option("--year", so.year, "Calendar year")->capture_default_str();
  synth->add_option("--mode", so.mode, "exact or realistic")->capture_default_str();

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Train one estimator on the training stations");
  add_corpus_options(train, to.corpus, false);
  train->add_option("--out", to.out, "Output directory")->capture_default_str();
  train->add_option("--seed", to.seed, "Run seed")->capture_default_str();
  train->add_option("--method", to.method, "svr, ann, ols or factor")->capture_default_str();
  train->add_option("--alternative", to.alternative, "Feature alternative 1..9")->capture_default_str();
  train->add_option("--scope", to.scope, "interstate, arterial or all")->capture_default_str();
  train->add_option("--train-fraction", to.train_fraction, "Share of stations used for training")
      ->capture_default_str();
  train->add_option("--sfs-hours", to.sfs_hours, "Hours kept by forward selection (24 = all)")
      ->capture_default_str();
  train->add_option("--max-train-rows", to.max_train_rows, "Row cap for SVR/ANN fits (0 = all)")
      ->capture_default_str();
  train->add_option("--cv-rows", to.cv_rows, "Row cap for SVR cross-validation (0 = all)")->capture_default_str();
  train->add_option("--svr-c", to.svr_c, "Fixed SVR cost; skips the grid search");
  train->add_option("--svr-gamma", to.svr_gamma, "Fixed RBF width; skips the grid search");
  train->add_option("--svr-epsilon", to.svr_epsilon, "Epsilon tube half-width")->capture_default_str();
  train->add_option("--kkt-tol", to.kkt_tol, "SMO stopping tolerance")->capture_default_str();
  train->add_option("--c-min", to.c_min, "Grid: lowest log2 C")->capture_default_str();
  train->add_option("--c-max", to.c_max, "Grid: highest log2 C")->capture_default_str();
  train->add_option("--gamma-min", to.gamma_min, "Grid: lowest log2 gamma")->capture_default_str();
  train->add_option("--gamma-max", to.gamma_max, "Grid: highest log2 gamma")->capture_default_str();
  train->add_option("--grid-step", to.grid_step, "Grid: exponent step")->capture_default_str();
  train->add_option("--folds", to.folds, "Cross-validation folds")->capture_default_str();
  train->add_option("--hidden", to.hidden, "Hidden-layer sizes to try")->capture_default_str();
  train->add_option("--max-epochs", to.max_epochs, "Levenberg-Marquardt epoch cap")->capture_default_str();
  train->add_option("--patience", to.patience, "Validation early-stop patience")->capture_default_str();
  train->add_option("--p-enter", to.p_enter, "Stepwise entry p-value")->capture_default_str();
  train->add_option("--p-remove", to.p_remove, "Stepwise removal p-value")->capture_default_str();
  train->add_option("--axle", to.axle, "Axle correction factor")->capture_default_str();

  EvaluateOptions eo;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model on held-out stations");
  add_corpus_options(evaluate_cmd, eo.corpus, true);
  evaluate_cmd->add_option("--model", eo.model, "Model artifact (model.json)")->required();
  evaluate_cmd->add_option("--out", eo.out, "Output directory")->capture_default_str();
  evaluate_cmd->add_option("--stations", eo.stations, "Explicit test stations (default: the model's split)");
  evaluate_cmd->add_option("--short-count", eo.short_count, "Score k-day short counts instead of full years")
      ->capture_default_str();
  evaluate_cmd->add_option("--cases", eo.cases, "Short-count stations")->capture_default_str();
  evaluate_cmd->add_flag("--cross-year", eo.cross_year, "Corpus is a different year than the model's");
  evaluate_cmd->add_option("--seed", eo.seed, "Seed for short-count case selection")->capture_default_str();

  CompareOptions co;
  auto* compare_cmd = app.add_subcommand("compare", "Compare evaluation reports over one test set");
  compare_cmd->add_option("reports", co.reports, "Report JSON files")->required();
  compare_cmd->add_option("--out", co.out, "Output directory")->capture_default_str();

  PredictOptions po;
  auto* predict = app.add_subcommand("predict", "Estimate AADT from count days");
  predict->add_option("--model", po.model, "Model artifact (model.json)")->required();
  predict->add_option("--counts", po.counts, "Hourly count CSV")->required();
  predict->add_option("--meta", po.meta, "Station metadata CSV");
  predict->add_option("--out", po.out, "Output CSV (default: stdout)");
  predict->add_flag("--short-count", po.short_count, "Require consecutive days per station");

  CoverageOptions vo;
  auto* coverage = app.add_subcommand("coverage", "Histogram of stations by months of missing data");
  coverage->add_option("--counts", vo.counts, "Hourly count CSV")->required();
  coverage->add_option("--out", vo.out, "Output CSV");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(so, out);
    if (train->parsed()) return cmd_train(to, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(eo, out, err);
    if (compare_cmd->parsed()) return cmd_compare(co, out);
    if (predict->parsed()) return cmd_predict(po, out, err);
    if (coverage->parsed()) return cmd_coverage(vo, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_of(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace aadt::cli
