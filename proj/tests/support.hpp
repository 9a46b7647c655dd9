#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "aadt/corpus.hpp"
#include "aadt/synth.hpp"

namespace aadt::test {

inline Date ymd(int y, unsigned m, unsigned d) {
  return std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
}

inline DayCount flat_day(const StationId& s, Date date, double per_hour) {
  DayCount d{s, date, {}};
  for (auto& h : d.hours) h = per_hour;
  return d;
}

// Every day of `year` with a constant per-hour volume.
inline std::vector<DayCount> flat_year(const StationId& s, int year, double per_hour) {
  std::vector<DayCount> out;
  using namespace std::chrono;
  for (sys_days d = sys_days(ymd(year, 1, 1)); d <= sys_days(ymd(year, 12, 31)); d += days(1))
    out.push_back(flat_day(s, year_month_day(d), per_hour));
  return out;
}

inline StationMeta meta_for(const StationId& s, FunctionalClass fc) {
  StationMeta m;
  m.station = s;
  m.functional_class = fc;
  m.urban = true;
  m.income = 50000;
  m.employment = 1000;
  m.pct_below_poverty = 12;
  m.vehicles = 800;
  m.housing_units = 900;
  return m;
}

// Exact-mode separable corpus: no noise, uniform weekday factors.
inline SynthConfig exact_config(int per_class = 3) {
  auto c = SynthConfig::standard(0.20, 0.0);
  c.stations_per_class = {{FunctionalClass::InterstateExpressway, per_class},
                          {FunctionalClass::PrincipalMinorArterial, per_class}};
  c.noise_sigma = 0.0;
  c.mode = SynthMode::Exact;
  return c;
}

inline CleanCorpus clean_corpus(const SynthCorpus& s, int max_missing_months = 6) {
  return join_meta(clean(s.counts, max_missing_months), s.meta);
}

}  // namespace aadt::test
