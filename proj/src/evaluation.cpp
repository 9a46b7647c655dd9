#include "aadt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "aadt/error.hpp"
#include "aadt/rng.hpp"
#include "csv.hpp"

namespace aadt {
namespace {

void check_lengths(std::span<const double> a, std::span<const double> p) {
  if (a.empty()) throw DataError("metric over an empty vector");
  if (a.size() != p.size())
    throw DataError("metric length mismatch: " + std::to_string(a.size()) + " actual vs " +
                    std::to_string(p.size()) + " predicted");
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

const StationMeta* meta_of(const CleanCorpus& corpus, const StationId& id) {
  const auto& s = corpus.station(id);
  return s.meta ? &*s.meta : nullptr;
}

void ensure_not_trained_on(const ModelArtifact& artifact, const std::vector<StationId>& stations) {
  const std::set<StationId> train(artifact.train_stations.begin(), artifact.train_stations.end());
  for (const auto& s : stations)
    if (train.count(s)) throw DataError("train/test overlap: station '" + s + "' was used for training");
}

bool native_factor(const ModelArtifact& a) {
  return a.method() == Method::Svr || a.method() == Method::Ann;
}

EvalReport report_header(const ModelArtifact& artifact) {
  EvalReport r;
  r.model = std::string(to_string(artifact.method()));
  r.alternative = artifact.alt.id;
  r.scope = std::string(to_string(artifact.alt.scope));
  r.train_hash = station_set_hash(artifact.train_stations);
  return r;
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted);
  double ss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) throw DataError("MAPE undefined: actual value is zero at index " + std::to_string(i));
    s += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
  }
  return 100.0 * s / static_cast<double>(actual.size());
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json stations = nlohmann::json::array();
  for (const auto& s : r.stations)
    stations.push_back({{"station_id", s.station},
                        {"days", s.days},
                        {"true_aadt", s.true_aadt},
                        {"mean_estimate", s.mean_estimate},
                        {"mape", s.mape}});
  return {{"kind", "eval_report"},
          {"version", 1},
          {"label", r.label},
          {"model", r.model},
          {"alternative", r.alternative},
          {"scope", r.scope},
          {"n_rows", r.n_rows},
          {"n_stations", r.n_stations},
          {"rmse_factor", opt_json(r.rmse_factor)},
          {"mape_factor", opt_json(r.mape_factor)},
          {"rmse_aadt", r.rmse_aadt},
          {"mape_aadt", r.mape_aadt},
          {"mape_station", r.mape_station},
          {"train_hash", r.train_hash},
          {"test_hash", r.test_hash},
          {"corpus_ids", r.corpus_ids},
          {"stations", stations}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "eval_report") throw DataError("not an evaluation report");
  EvalReport r;
  r.label = j.value("label", "held-out");
  r.model = j.at("model").get<std::string>();
  r.alternative = j.at("alternative").get<int>();
  r.scope = j.at("scope").get<std::string>();
  r.n_rows = j.at("n_rows").get<std::size_t>();
  r.n_stations = j.at("n_stations").get<std::size_t>();
  r.rmse_factor = opt_from(j, "rmse_factor");
  r.mape_factor = opt_from(j, "mape_factor");
  r.rmse_aadt = j.at("rmse_aadt").get<double>();
  r.mape_aadt = j.at("mape_aadt").get<double>();
  r.mape_station = j.value("mape_station", 0.0);
  r.train_hash = j.value("train_hash", "");
  r.test_hash = j.at("test_hash").get<std::string>();
  r.corpus_ids = j.value("corpus_ids", std::vector<std::string>{});
  for (const auto& s : j.value("stations", nlohmann::json::array()))
    r.stations.push_back({s.at("station_id").get<std::string>(), s.at("days").get<std::size_t>(),
                          s.at("true_aadt").get<double>(), s.at("mean_estimate").get<double>(),
                          s.at("mape").get<double>()});
  return r;
}

void write_text(std::ostream& out, const EvalReport& r) {
  out << "report       " << r.label << '\n'
      << "model        " << r.model << " (alternative " << r.alternative << ", scope " << r.scope << ")\n"
      << "rows         " << r.n_rows << " station-days over " << r.n_stations << " stations\n";
  if (r.rmse_factor) out << "rmse_factor  " << fmt(*r.rmse_factor, "%.6f") << '\n';
  if (r.mape_factor) out << "mape_factor  " << fmt(*r.mape_factor, "%.3f") << " %\n";
  out << "rmse_aadt    " << fmt(r.rmse_aadt, "%.2f") << " veh/day\n"
      << "mape_aadt    " << fmt(r.mape_aadt, "%.3f") << " %\n"
      << "mape_station " << fmt(r.mape_station, "%.3f") << " %\n"
      << "test set     " << r.test_hash << '\n';
  for (const auto& id : r.corpus_ids) out << "corpus       " << id << '\n';
  out << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %6s %14s %14s %9s\n", "station", "days", "true_aadt", "mean_est", "mape%");
  out << line;
  for (const auto& s : r.stations) {
    std::snprintf(line, sizeof line, "%-12s %6zu %14.2f %14.2f %9.3f\n", s.station.c_str(), s.days, s.true_aadt,
                  s.mean_estimate, s.mape);
    out << line;
  }
}

EvalReport evaluate(const ModelArtifact& artifact, const CleanCorpus& corpus, const std::vector<StationId>& test,
                    const TruthMap* truth) {
  if (test.empty()) throw DataError("empty test set");
  ensure_not_trained_on(artifact, test);
  std::vector<StationId> ordered = test;
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  EvalReport r = report_header(artifact);
  r.test_hash = station_set_hash(ordered);
  r.corpus_ids = {hex64(corpus.content_hash())};

  std::vector<double> true_factor, pred_factor, true_aadt, pred_aadt, station_true, station_mean;
  for (const auto& id : ordered) {
    if (!corpus.contains(id)) throw DataError("test station '" + id + "' is not in the corpus");
    const auto& data = corpus.station(id);
    if (data.days.empty()) continue;
    double aadt = ground_truth_aadt(data.days);
    if (truth) {
      const auto it = truth->find(id);
      if (it == truth->end()) throw DataError("no ground truth for station '" + id + "'");
      aadt = it->second;
    }
    const StationMeta* meta = data.meta ? &*data.meta : nullptr;
    std::vector<double> est;
    est.reserve(data.days.size());
    for (const auto& day : data.days) {
      const auto p = artifact.predict(day, meta);
      const double total = daily_total(day);
      true_factor.push_back(aadt / total);
      pred_factor.push_back(p.factor);
      true_aadt.push_back(aadt);
      pred_aadt.push_back(p.aadt);
      est.push_back(p.aadt);
    }
    const std::vector<double> t(est.size(), aadt);
    StationRow row;
    row.station = id;
    row.days = est.size();
    row.true_aadt = aadt;
    double sum = 0.0;
    for (double e : est) sum += e;
    row.mean_estimate = sum / static_cast<double>(est.size());
    row.mape = mape(t, est);
    station_true.push_back(aadt);
    station_mean.push_back(row.mean_estimate);
    r.stations.push_back(std::move(row));
  }
  if (r.stations.empty()) throw DataError("empty test set: no retained days at the test stations");
  r.n_rows = true_aadt.size();
  r.n_stations = r.stations.size();
  if (native_factor(artifact)) {
    r.rmse_factor = rmse(true_factor, pred_factor);
    r.mape_factor = mape(true_factor, pred_factor);
  }
  r.rmse_aadt = rmse(true_aadt, pred_aadt);
  r.mape_aadt = mape(true_aadt, pred_aadt);
  r.mape_station = mape(station_true, station_mean);
  return r;
}

ComparisonTable compare(const std::vector<EvalReport>& reports) {
  if (reports.size() < 2) throw UsageError("compare needs at least two reports");
  ComparisonTable t;
  t.test_hash = reports.front().test_hash;
  for (const auto& r : reports)
    if (r.test_hash != t.test_hash)
      throw DataError("reports cover different test sets (" + t.test_hash + " vs " + r.test_hash + ")");
  std::map<std::string, double> best;
  for (const auto& r : reports) {
    auto [it, fresh] = best.emplace(r.scope, r.mape_aadt);
    if (!fresh) it->second = std::min(it->second, r.mape_aadt);
  }
  for (const auto& r : reports)
    t.rows.push_back({r.model, r.alternative, r.scope, r.rmse_factor, r.mape_factor, r.rmse_aadt, r.mape_aadt,
                      r.mape_aadt == best.at(r.scope)});
  return t;
}

void write_csv(std::ostream& out, const ComparisonTable& t) {
  out << "model,alternative,scope,rmse_factor,mape_factor,rmse_aadt,mape_aadt,best\n";
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : t.rows)
    out << r.model << ',' << r.alternative << ',' << r.scope << ',' << opt(r.rmse_factor) << ','
        << opt(r.mape_factor) << ',' << csv::format_double(r.rmse_aadt) << ',' << csv::format_double(r.mape_aadt)
        << ',' << (r.best ? 1 : 0) << '\n';
}

void write_text(std::ostream& out, const ComparisonTable& t) {
  char line[200];
  std::snprintf(line, sizeof line, "%-8s %4s %-11s %12s %12s %12s %10s %5s\n", "model", "alt", "scope",
                "rmse_factor", "mape_factor", "rmse_aadt", "mape_aadt", "best");
  out << "test set " << t.test_hash << '\n' << line;
  for (const auto& r : t.rows) {
    const auto rf = r.rmse_factor ? fmt(*r.rmse_factor, "%.6f") : std::string("-");
    const auto mf = r.mape_factor ? fmt(*r.mape_factor, "%.3f") : std::string("-");
    std::snprintf(line, sizeof line, "%-8s %4d %-11s %12s %12s %12.2f %10.3f %5s\n", r.model.c_str(),
                  r.alternative, r.scope.c_str(), rf.c_str(), mf.c_str(), r.rmse_aadt, r.mape_aadt,
                  r.best ? "*" : "");
    out << line;
  }
}

void ShortCountCase::validate() const {
  if (days.empty()) throw DataError("short count for '" + station + "' has no days");
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (!days[i].complete()) throw DataError("short count for '" + station + "' has an incomplete day");
    if (days[i].station != station) throw DataError("short count day belongs to a different station");
    if (i > 0 && std::chrono::sys_days(days[i].date) - std::chrono::sys_days(days[i - 1].date) != std::chrono::days(1))
      throw DataError("short count days for '" + station + "' are not consecutive");
  }
  if (!(true_aadt > 0.0)) throw DataError("short count for '" + station + "' has no positive ground truth");
}

std::vector<StationId> sample_stations(std::vector<StationId> stations, std::size_t n, std::uint64_t seed) {
  std::sort(stations.begin(), stations.end());
  auto rng = Rng::substream(seed, "short-count-stations");
  rng.shuffle(stations);
  if (stations.size() > n) stations.resize(n);
  std::sort(stations.begin(), stations.end());
  return stations;
}

std::vector<ShortCountCase> make_short_count_cases(const CleanCorpus& corpus, const std::vector<StationId>& stations,
                                                   int k, std::uint64_t seed, const TruthMap* truth) {
  if (k < 1) throw UsageError("short count length must be at least one day");
  std::vector<ShortCountCase> cases;
  for (std::size_t s = 0; s < stations.size(); ++s) {
    const auto& id = stations[s];
    const auto& days = corpus.station(id).days;
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= days.size(); ++i) {
      bool run = true;
      for (int j = 1; j < k && run; ++j)
        run = std::chrono::sys_days(days[i + j].date) - std::chrono::sys_days(days[i + j - 1].date) ==
              std::chrono::days(1);
      if (run) starts.push_back(i);
    }
    if (starts.empty())
      throw DataError("station '" + id + "' has no run of " + std::to_string(k) + " consecutive complete days");
    auto rng = Rng::substream(seed, "short-count", s);
    const std::size_t start = starts[rng.below(starts.size())];
    ShortCountCase c;
    c.station = id;
    c.days.assign(days.begin() + static_cast<std::ptrdiff_t>(start),
                  days.begin() + static_cast<std::ptrdiff_t>(start) + k);
    if (truth) {
      const auto it = truth->find(id);
      if (it == truth->end()) throw DataError("no ground truth for station '" + id + "'");
      c.true_aadt = it->second;
    } else {
      c.true_aadt = ground_truth_aadt(days);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

EvalReport short_count(const std::vector<ShortCountCase>& cases, const ModelArtifact& artifact,
                       const CleanCorpus& corpus) {
  if (cases.empty()) throw DataError("no short-count cases");
  std::vector<StationId> ids;
  for (const auto& c : cases) {
    c.validate();
    ids.push_back(c.station);
  }
  ensure_not_trained_on(artifact, ids);

  EvalReport r = report_header(artifact);
  r.label = "short-count";
  r.test_hash = station_set_hash(ids);
  r.corpus_ids = {hex64(corpus.content_hash())};
  std::vector<double> true_factor, pred_factor, truth, estimate;
  for (const auto& c : cases) {
    const StationMeta* meta = corpus.contains(c.station) ? meta_of(corpus, c.station) : nullptr;
    double sum = 0.0;
    std::vector<double> per_day;
    for (const auto& day : c.days) {
      const auto p = artifact.predict(day, meta);
      true_factor.push_back(c.true_aadt / daily_total(day));
      pred_factor.push_back(p.factor);
      per_day.push_back(p.aadt);
      sum += p.aadt;
    }
    const double mean = sum / static_cast<double>(c.days.size());
    truth.push_back(c.true_aadt);
    estimate.push_back(mean);
    const std::vector<double> t(per_day.size(), c.true_aadt);
    r.stations.push_back({c.station, c.days.size(), c.true_aadt, mean, mape(t, per_day)});
    r.n_rows += c.days.size();
  }
  r.n_stations = cases.size();
  if (native_factor(artifact)) {
    r.rmse_factor = rmse(true_factor, pred_factor);
    r.mape_factor = mape(true_factor, pred_factor);
  }
  // One estimate per case: the mean over its days.
  r.rmse_aadt = rmse(truth, estimate);
  r.mape_aadt = mape(truth, estimate);
  r.mape_station = r.mape_aadt;
  return r;
}

}  // namespace aadt
