#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aadt {

using StationId = std::string;
using Date = std::chrono::year_month_day;

enum class FunctionalClass { InterstateExpressway, PrincipalMinorArterial, Collector, Local };

inline constexpr std::array<FunctionalClass, 4> kAllClasses = {
    FunctionalClass::InterstateExpressway, FunctionalClass::PrincipalMinorArterial,
    FunctionalClass::Collector, FunctionalClass::Local};

// CSV spelling: interstate, arterial, collector, local.
std::string_view to_string(FunctionalClass fc);
std::optional<FunctionalClass> parse_functional_class(std::string_view s);

std::optional<Date> parse_date(std::string_view s);  // strict YYYY-MM-DD
std::string format_date(const Date& d);
int month_index(const Date& d);    // 0 = January
int weekday_index(const Date& d);  // 0 = Monday

// One station-day of hourly volumes. A missing hour is std::nullopt.
struct DayCount {
  StationId station;
  Date date;
  std::array<std::optional<double>, 24> hours;

  bool complete() const;
  double total() const;  // sum of present hours
};

struct StationMeta {
  StationId station;
  FunctionalClass functional_class = FunctionalClass::InterstateExpressway;
  bool urban = false;
  double income = 0.0;
  double employment = 0.0;
  double pct_below_poverty = 0.0;
  double vehicles = 0.0;
  double housing_units = 0.0;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based line in the input, header is line 1
  std::string message;
};

template <typename T>
struct ParseResult {
  std::vector<T> rows;
  std::vector<Diagnostic> diagnostics;
};

// Throws DataError when the stream is unreadable or the header is wrong;
// row-level problems become diagnostics.
ParseResult<DayCount> parse_counts(std::istream& in);
ParseResult<StationMeta> parse_meta(std::istream& in);

void write_counts(std::ostream& out, const std::vector<DayCount>& days);
void write_meta(std::ostream& out, const std::vector<StationMeta>& meta);

struct CleaningEvent {
  StationId station;
  std::optional<Date> date;  // empty for whole-station removals
  std::string reason;
};

struct StationData {
  std::vector<DayCount> days;  // sorted by date, all complete
  std::optional<StationMeta> meta;

  bool has_socio() const { return meta.has_value(); }
};

// Immutable cleaned corpus keyed by station id (ordered).
class CleanCorpus {
 public:
  CleanCorpus() = default;
  CleanCorpus(std::map<StationId, StationData> stations, std::vector<CleaningEvent> log,
              int year);

  const std::map<StationId, StationData>& stations() const { return stations_; }
  const StationData& station(const StationId& id) const;
  bool contains(const StationId& id) const { return stations_.count(id) != 0; }
  const std::vector<CleaningEvent>& log() const { return log_; }
  int year() const { return year_; }
  std::size_t day_count() const;

  // Stable content hash over every retained hour value and metadata row.
  std::uint64_t content_hash() const;

  std::vector<DayCount> all_days() const;

 private:
  std::map<StationId, StationData> stations_;
  std::vector<CleaningEvent> log_;
  int year_ = 0;
};

// Calendar year holding the most records; ties resolve to the earliest year.
int dominant_year(const std::vector<DayCount>& records);

// Number of months of `year` in which the station has no complete day with a
// positive total.
int missing_months(const std::vector<DayCount>& station_days, int year);

CleanCorpus clean(const std::vector<DayCount>& records, int max_missing_months = 6);

struct CoverageReport {
  int year = 0;
  std::array<std::size_t, 13> buckets{};  // index = months of missing data
  std::size_t station_count() const;
};

CoverageReport coverage_report(const std::vector<DayCount>& records);

CleanCorpus join_meta(const CleanCorpus& corpus, const std::vector<StationMeta>& meta);

}  // namespace aadt
