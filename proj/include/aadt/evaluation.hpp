#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aadt/model.hpp"

namespace aadt {

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mape(std::span<const double> actual, std::span<const double> predicted);  // percent

struct StationRow {
  StationId station;
  std::size_t days = 0;
  double true_aadt = 0.0;
  double mean_estimate = 0.0;
  double mape = 0.0;  // over this station's day estimates
};

struct EvalReport {
  std::string model;
  int alternative = 0;
  std::string scope;
  std::string label = "held-out";
  std::size_t n_rows = 0;
  std::size_t n_stations = 0;
  std::optional<double> rmse_factor;  // SVR and ANN only
  std::optional<double> mape_factor;
  double rmse_aadt = 0.0;  // per station-day
  double mape_aadt = 0.0;
  double mape_station = 0.0;  // station mean estimate vs true AADT
  std::vector<StationRow> stations;
  std::string train_hash;
  std::string test_hash;
  std::vector<std::string> corpus_ids;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
void write_text(std::ostream& out, const EvalReport& r);

using TruthMap = std::map<StationId, double>;

// Scores `artifact` on the complete days of `test` stations. Truth defaults to
// the mean daily total of each station; `truth` overrides it per station.
EvalReport evaluate(const ModelArtifact& artifact, const CleanCorpus& corpus,
                    const std::vector<StationId>& test, const TruthMap* truth = nullptr);

struct ComparisonRow {
  std::string model;
  int alternative = 0;
  std::string scope;
  std::optional<double> rmse_factor;
  std::optional<double> mape_factor;
  double rmse_aadt = 0.0;
  double mape_aadt = 0.0;
  bool best = false;
};

struct ComparisonTable {
  std::string test_hash;
  std::vector<ComparisonRow> rows;
};

ComparisonTable compare(const std::vector<EvalReport>& reports);
void write_csv(std::ostream& out, const ComparisonTable& t);
void write_text(std::ostream& out, const ComparisonTable& t);

struct ShortCountCase {
  StationId station;
  std::vector<DayCount> days;  // complete and consecutive
  double true_aadt = 0.0;

  void validate() const;
};

// Up to `n` stations drawn by seeded shuffle of the sorted input.
std::vector<StationId> sample_stations(std::vector<StationId> stations, std::size_t n, std::uint64_t seed);

// One case per station: `k` consecutive complete days starting at a seeded
// random position. Truth comes from `truth` when given, else the station's
// mean daily total.
std::vector<ShortCountCase> make_short_count_cases(const CleanCorpus& corpus,
                                                   const std::vector<StationId>& stations, int k,
                                                   std::uint64_t seed, const TruthMap* truth = nullptr);

EvalReport short_count(const std::vector<ShortCountCase>& cases, const ModelArtifact& artifact,
                       const CleanCorpus& corpus);

}  // namespace aadt
