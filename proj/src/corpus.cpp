#include "aadt/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "aadt/error.hpp"
#include "aadt/rng.hpp"
#include "csv.hpp"

namespace aadt {

namespace {

constexpr std::string_view kMetaHeader =
    "station_id,functional_class,urban,income,employment,pct_below_poverty,vehicles,"
    "housing_units";

std::string counts_header() {
  std::string h = "station_id,date";
  for (int i = 0; i < 24; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ",h%02d", i);
    h += buf;
  }
  return h;
}

bool is_valid_station_id(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\"") == std::string_view::npos;
}

}  // namespace

std::string_view to_string(FunctionalClass fc) {
  switch (fc) {
    case FunctionalClass::InterstateExpressway: return "interstate";
    case FunctionalClass::PrincipalMinorArterial: return "arterial";
    case FunctionalClass::Collector: return "collector";
    case FunctionalClass::Local: return "local";
  }
  return "unknown";
}

std::optional<FunctionalClass> parse_functional_class(std::string_view s) {
  for (auto fc : kAllClasses)
    if (to_string(fc) == s) return fc;
  return std::nullopt;
}

std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

int month_index(const Date& d) { return static_cast<int>(static_cast<unsigned>(d.month())) - 1; }

int weekday_index(const Date& d) {
  const std::chrono::weekday wd{std::chrono::sys_days{d}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

bool DayCount::complete() const {
  return std::all_of(hours.begin(), hours.end(), [](const auto& h) { return h.has_value(); });
}

double DayCount::total() const {
  double t = 0.0;
  for (const auto& h : hours)
    if (h) t += *h;
  return t;
}

ParseResult<DayCount> parse_counts(std::istream& in) {
  if (!in) throw DataError("count stream is not readable");
  ParseResult<DayCount> result;
  std::string line;
  if (!std::getline(in, line)) throw DataError("count stream is empty");
  if (csv::trim_cr(line) != counts_header())
    throw DataError("count CSV header mismatch: expected '" + counts_header() + "'");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto cells = csv::split(text);
    auto diag = [&](std::string msg) { result.diagnostics.push_back({lineno, std::move(msg)}); };
    if (cells.size() != 26) {
      diag("wrong column count: expected 26, got " + std::to_string(cells.size()));
      continue;
    }
    if (!is_valid_station_id(cells[0])) {
      diag("invalid station id");
      continue;
    }
    const auto date = parse_date(cells[1]);
    if (!date) {
      diag("invalid date '" + std::string(cells[1]) + "'");
      continue;
    }
    DayCount day{std::string(cells[0]), *date, {}};
    bool ok = true;
    for (int h = 0; h < 24 && ok; ++h) {
      const auto cell = cells[static_cast<std::size_t>(h) + 2];
      if (cell == "NA") continue;
      const auto v = csv::parse_double(cell);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        diag("invalid volume '" + std::string(cell) + "' in hour " + std::to_string(h));
        ok = false;
      } else {
        day.hours[static_cast<std::size_t>(h)] = *v;
      }
    }
    if (ok) result.rows.push_back(std::move(day));
  }
  if (in.bad()) throw DataError("read error on count stream");
  return result;
}

ParseResult<StationMeta> parse_meta(std::istream& in) {
  if (!in) throw DataError("metadata stream is not readable");
  ParseResult<StationMeta> result;
  std::string line;
  if (!std::getline(in, line)) throw DataError("metadata stream is empty");
  if (csv::trim_cr(line) != kMetaHeader)
    throw DataError("metadata CSV header mismatch: expected '" + std::string(kMetaHeader) + "'");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto cells = csv::split(text);
    auto diag = [&](std::string msg) { result.diagnostics.push_back({lineno, std::move(msg)}); };
    if (cells.size() != 8) {
      diag("wrong column count: expected 8, got " + std::to_string(cells.size()));
      continue;
    }
    StationMeta m;
    if (!is_valid_station_id(cells[0])) {
      diag("invalid station id");
      continue;
    }
    m.station = std::string(cells[0]);
    const auto fc = parse_functional_class(cells[1]);
    if (!fc) {
      diag("unknown functional_class '" + std::string(cells[1]) + "'");
      continue;
    }
    m.functional_class = *fc;
    if (cells[2] != "0" && cells[2] != "1") {
      diag("urban must be 0 or 1");
      continue;
    }
    m.urban = cells[2] == "1";
    double* targets[] = {&m.income, &m.employment, &m.pct_below_poverty, &m.vehicles,
                         &m.housing_units};
    bool ok = true;
    for (std::size_t k = 0; k < 5 && ok; ++k) {
      const auto v = csv::parse_double(cells[k + 3]);
      if (!v || !std::isfinite(*v) || *v < 0.0 || (k == 2 && *v > 100.0)) {
        diag("value out of range in column " + std::to_string(k + 4));
        ok = false;
      } else {
        *targets[k] = *v;
      }
    }
    if (ok) result.rows.push_back(std::move(m));
  }
  return result;
}

void write_counts(std::ostream& out, const std::vector<DayCount>& days) {
  out << counts_header() << '\n';
  for (const auto& d : days) {
    out << d.station << ',' << format_date(d.date);
    for (const auto& h : d.hours) {
      out << ',';
      if (h)
        out << csv::format_double(*h);
      else
        out << "NA";
    }
    out << '\n';
  }
}

void write_meta(std::ostream& out, const std::vector<StationMeta>& meta) {
  out << kMetaHeader << '\n';
  for (const auto& m : meta) {
    out << m.station << ',' << to_string(m.functional_class) << ',' << (m.urban ? 1 : 0) << ','
        << csv::format_double(m.income) << ',' << csv::format_double(m.employment) << ','
        << csv::format_double(m.pct_below_poverty) << ',' << csv::format_double(m.vehicles)
        << ',' << csv::format_double(m.housing_units) << '\n';
  }
}

CleanCorpus::CleanCorpus(std::map<StationId, StationData> stations,
                         std::vector<CleaningEvent> log, int year)
    : stations_(std::move(stations)), log_(std::move(log)), year_(year) {}

const StationData& CleanCorpus::station(const StationId& id) const {
  const auto it = stations_.find(id);
  if (it == stations_.end()) throw DataError("unknown station '" + id + "'");
  return it->second;
}

std::size_t CleanCorpus::day_count() const {
  std::size_t n = 0;
  for (const auto& [id, s] : stations_) n += s.days.size();
  return n;
}

std::uint64_t CleanCorpus::content_hash() const {
  std::uint64_t h = fnv1a64("corpus");
  for (const auto& [id, s] : stations_) {
    h = fnv1a64(id, h);
    for (const auto& d : s.days) {
      h = fnv1a64(format_date(d.date), h);
      for (const auto& v : d.hours) h = fnv1a64(csv::format_double(*v), h);
    }
    if (s.meta) {
      const auto& m = *s.meta;
      h = fnv1a64(to_string(m.functional_class), h);
      for (double v : {m.urban ? 1.0 : 0.0, m.income, m.employment, m.pct_below_poverty,
                       m.vehicles, m.housing_units})
        h = fnv1a64(csv::format_double(v), h);
    }
  }
  return h;
}

std::vector<DayCount> CleanCorpus::all_days() const {
  std::vector<DayCount> out;
  out.reserve(day_count());
  for (const auto& [id, s] : stations_) out.insert(out.end(), s.days.begin(), s.days.end());
  return out;
}

int dominant_year(const std::vector<DayCount>& records) {
  std::map<int, std::size_t> counts;
  for (const auto& r : records) ++counts[static_cast<int>(r.date.year())];
  int best = 0;
  std::size_t best_n = 0;
  for (const auto& [y, n] : counts)
    if (n > best_n) best = y, best_n = n;
  return best;
}

int missing_months(const std::vector<DayCount>& station_days, int year) {
  std::array<bool, 12> seen{};
  for (const auto& d : station_days)
    if (static_cast<int>(d.date.year()) == year && d.complete() && d.total() > 0.0)
      seen[static_cast<std::size_t>(month_index(d.date))] = true;
  return static_cast<int>(std::count(seen.begin(), seen.end(), false));
}

CleanCorpus clean(const std::vector<DayCount>& records, int max_missing_months) {
  if (records.empty()) throw DataError("no count records to clean");
  const int year = dominant_year(records);

  std::map<StationId, std::vector<DayCount>> by_station;
  std::vector<CleaningEvent> log;
  for (const auto& r : records) {
    auto& kept = by_station[r.station];
    if (!r.complete()) {
      log.push_back({r.station, r.date, "missing hour"});
    } else if (!(r.total() > 0.0)) {
      log.push_back({r.station, r.date, "zero total"});
    } else {
      kept.push_back(r);
    }
  }

  std::map<StationId, StationData> stations;
  for (auto& [id, days] : by_station) {
    std::stable_sort(days.begin(), days.end(),
                     [](const DayCount& a, const DayCount& b) { return a.date < b.date; });
    const int missing = missing_months(days, year);
    if (missing > max_missing_months) {
      log.push_back({id, std::nullopt,
                     "station dropped: " + std::to_string(missing) + " missing months > " +
                         std::to_string(max_missing_months)});
      continue;
    }
    stations.emplace(id, StationData{std::move(days), std::nullopt});
  }
  if (stations.empty()) throw DataError("empty corpus after cleaning");
  return CleanCorpus(std::move(stations), std::move(log), year);
}

std::size_t CoverageReport::station_count() const {
  std::size_t n = 0;
  for (auto b : buckets) n += b;
  return n;
}

CoverageReport coverage_report(const std::vector<DayCount>& records) {
  CoverageReport report;
  if (records.empty()) return report;
  report.year = dominant_year(records);
  std::map<StationId, std::vector<DayCount>> by_station;
  for (const auto& r : records) by_station[r.station].push_back(r);
  for (const auto& [id, days] : by_station)
    ++report.buckets[static_cast<std::size_t>(missing_months(days, report.year))];
  return report;
}

CleanCorpus join_meta(const CleanCorpus& corpus, const std::vector<StationMeta>& meta) {
  std::map<StationId, const StationMeta*> index;
  for (const auto& m : meta)
    if (!index.emplace(m.station, &m).second)
      throw DataError("duplicate metadata for station '" + m.station + "'");

  auto stations = corpus.stations();
  for (auto& [id, s] : stations) {
    const auto it = index.find(id);
    s.meta = it == index.end() ? std::nullopt : std::optional<StationMeta>(*it->second);
  }
  return CleanCorpus(std::move(stations), corpus.log(), corpus.year());
}

}  // namespace aadt
