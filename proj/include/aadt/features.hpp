#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aadt/corpus.hpp"

namespace aadt {

double daily_total(const DayCount& day);
std::array<double, 24> hourly_factors(const DayCount& day);
double ground_truth_aadt(std::span<const DayCount> days);
double aadt_factor(const DayCount& day, double aadt);

struct CalendarEncoding {
  std::array<int, 7> day{};     // 0 = Monday
  std::array<int, 12> month{};  // 0 = January
};
CalendarEncoding encode_calendar(const Date& date);

enum class VolumeForm { Factors, RawCounts };
enum class RowFilter { All, MondayOnly, JanuaryOnly };
enum class Scope { InterstateExpressway, PrincipalMinorArterial, AllAtr };
enum class SocioField { Urban, Income, Employment, PctBelowPoverty, Vehicles, HousingUnits };
enum class TargetKind { AadtFactor, Aadt };

inline constexpr std::array<SocioField, 6> kAllSocio = {
    SocioField::Urban,      SocioField::Income,   SocioField::Employment,
    SocioField::PctBelowPoverty, SocioField::Vehicles, SocioField::HousingUnits};

std::string_view to_string(Scope s);  // interstate, arterial, all
std::optional<Scope> parse_scope(std::string_view s);
std::string_view to_string(SocioField f);
std::optional<SocioField> parse_socio_field(std::string_view s);

bool in_scope(const StationData& station, Scope scope);

struct AlternativeSpec {
  int id = 2;
  VolumeForm volume_form = VolumeForm::Factors;
  bool use_day_onehot = true;
  bool use_month_onehot = true;
  std::vector<SocioField> socio_fields;
  RowFilter row_filter = RowFilter::All;
  Scope scope = Scope::AllAtr;
  // Alternatives 1 and 6-9 are presets whose exact composition is not
  // recoverable; they are marked reconstructed in artifacts.
  bool reconstructed = false;

  void validate() const;  // UsageError on violation
};

// Registry of alternatives 1..9 on the given scope.
AlternativeSpec alternative(int id, Scope scope);

struct DesignMatrix {
  std::vector<StationId> station;
  std::vector<Date> date;
  std::vector<std::string> columns;
  Eigen::MatrixXd X;
  Eigen::VectorXd target;
  Eigen::VectorXd day_total;     // daily_total of the row's day
  Eigen::VectorXd station_aadt;  // ground truth AADT of the row's station

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  int column_index(std::string_view name) const;  // -1 when absent
  DesignMatrix subset(const std::vector<Eigen::Index>& rows) const;
};

struct AssembleOptions {
  // Restrict rows to these stations (in addition to the scope filter).
  std::optional<std::vector<StationId>> stations;
  // Functional class indicator columns (reference class dropped); used by the
  // regression model.
  bool class_indicators = false;
};

// Canonical column names: hf00..hf23 or v00..v23, dow0..dow6, mon00..mon11,
// socio names, fc_<class>.
std::vector<std::string> feature_columns(const AlternativeSpec& alt,
                                         std::span<const int> selected_hours,
                                         std::span<const FunctionalClass> indicator_classes = {});

// One feature row for a single day, driven by column names. Throws DataError
// if a socio or class column is requested and `meta` is null.
Eigen::VectorXd feature_row(const DayCount& day, const StationMeta* meta,
                            std::span<const std::string> columns);

DesignMatrix assemble(const CleanCorpus& corpus, const AlternativeSpec& alt,
                      std::span<const int> selected_hours, TargetKind target,
                      const AssembleOptions& options = {});

void write_design_matrix(std::ostream& out, const DesignMatrix& m);

struct SplitSpec {
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 42;
};

struct StationSplit {
  std::vector<StationId> train;
  std::vector<StationId> test;
};

std::vector<StationId> scope_stations(const CleanCorpus& corpus, Scope scope);
StationSplit split(const CleanCorpus& corpus, Scope scope, const SplitSpec& spec);
// Split of an explicit station list (sorted before shuffling).
StationSplit split_stations(std::vector<StationId> stations, const SplitSpec& spec);

struct SfsResult {
  std::vector<int> order;         // selected column indices in selection order
  std::vector<double> rss_path;   // RSS after each step
};

// Greedy forward selection minimizing the intercept-OLS RSS; ties go to the
// lowest column index.
SfsResult sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_k);

namespace reference {
SfsResult sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_k);
}

// Hash over a sorted station list; used to tie reports to a test set.
std::string station_set_hash(std::vector<StationId> stations);

}  // namespace aadt
