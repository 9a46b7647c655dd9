#include "aadt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "aadt/error.hpp"
#include "aadt/rng.hpp"
#include "csv.hpp"

namespace aadt {

namespace {

template <std::size_t N>
std::array<double, N> normalize_mean(std::array<double, N> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(N);
  for (auto& x : v) x /= mean;
  return v;
}

template <std::size_t N>
double mean_of(const std::array<double, N>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(N);
}

std::string station_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03d", index + 1);
  return buf;
}

struct StationPlan {
  int index;
  FunctionalClass fc;
};

struct StationOutput {
  std::vector<DayCount> days;
  StationMeta meta;
  StationTruth truth;
};

}  // namespace

SynthConfig SynthConfig::standard(double monthly_amplitude, double dow_amplitude) {
  SynthConfig c;
  c.stations_per_class = {{FunctionalClass::InterstateExpressway, 30},
                          {FunctionalClass::PrincipalMinorArterial, 30}};
  c.aadt_range = {{FunctionalClass::InterstateExpressway, {20000.0, 80000.0}},
                  {FunctionalClass::PrincipalMinorArterial, {5000.0, 25000.0}},
                  {FunctionalClass::Collector, {1500.0, 8000.0}},
                  {FunctionalClass::Local, {200.0, 2000.0}}};
  // Summer peak, winter trough.
  for (int k = 0; k < 12; ++k)
    c.monthly_factors[static_cast<std::size_t>(k)] =
        1.0 + monthly_amplitude * std::sin(2.0 * std::numbers::pi * (k - 3) / 12.0);
  c.monthly_factors = normalize_mean(c.monthly_factors);
  // Midweek peak, weekend trough.
  for (int d = 0; d < 7; ++d)
    c.dow_factors[static_cast<std::size_t>(d)] =
        1.0 + dow_amplitude * std::cos(2.0 * std::numbers::pi * (d - 2) / 7.0);
  c.dow_factors = normalize_mean(c.dow_factors);
  // Night floor with morning and evening commuter peaks.
  double sum = 0.0;
  for (int h = 0; h < 24; ++h) {
    const double am = std::exp(-0.5 * std::pow((h - 7.5) / 1.5, 2));
    const double pm = std::exp(-0.5 * std::pow((h - 17.0) / 2.0, 2));
    const double day = h >= 6 && h <= 21 ? 0.6 : 0.0;
    c.hourly_profile[static_cast<std::size_t>(h)] = 0.15 + day + 1.2 * am + 1.4 * pm;
    sum += c.hourly_profile[static_cast<std::size_t>(h)];
  }
  for (auto& p : c.hourly_profile) p /= sum;
  return c;
}

void SynthConfig::validate() const {
  int total = 0;
  for (const auto& [fc, n] : stations_per_class) {
    if (n < 0) throw UsageError("stations_per_class must be non-negative");
    total += n;
    if (n > 0) {
      const auto it = aadt_range.find(fc);
      if (it == aadt_range.end())
        throw UsageError("aadt_range missing for class " + std::string(to_string(fc)));
      if (!(it->second.first > 0.0) || !(it->second.first <= it->second.second))
        throw UsageError("aadt_range must satisfy 0 < low <= high");
    }
  }
  if (total == 0) throw UsageError("empty corpus: stations_per_class sums to zero");
  for (double m : monthly_factors)
    if (!(m > 0.0) || !std::isfinite(m)) throw UsageError("monthly_factors must be positive");
  if (std::abs(mean_of(monthly_factors) - 1.0) > 1e-12)
    throw UsageError("mean(monthly_factors) must equal 1");
  for (double w : dow_factors)
    if (!(w > 0.0) || !std::isfinite(w)) throw UsageError("dow_factors must be positive");
  if (std::abs(mean_of(dow_factors) - 1.0) > 1e-12)
    throw UsageError("mean(dow_factors) must equal 1");
  double psum = 0.0;
  for (double p : hourly_profile) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw UsageError("hourly_profile must be non-negative");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-12) throw UsageError("sum(hourly_profile) must equal 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw UsageError("noise_sigma must be >= 0");
  if (!(missing_day_rate >= 0.0 && missing_day_rate <= 1.0))
    throw UsageError("missing_day_rate must lie in [0,1]");
  if (!(missing_hour_rate >= 0.0 && missing_hour_rate <= 1.0))
    throw UsageError("missing_hour_rate must lie in [0,1]");
  if (!(socio_aadt_link >= 0.0 && socio_aadt_link <= 1.0))
    throw UsageError("socio_aadt_link must lie in [0,1]");
  if (year < 1 || year > 9999) throw UsageError("year out of range");
}

const StationTruth* SynthTruth::find(const StationId& id) const {
  for (const auto& s : stations)
    if (s.station == id) return &s;
  return nullptr;
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  using namespace std::chrono;

  std::vector<StationPlan> plan;
  for (auto fc : kAllClasses) {
    const auto it = config.stations_per_class.find(fc);
    const int n = it == config.stations_per_class.end() ? 0 : it->second;
    for (int i = 0; i < n; ++i) plan.push_back({static_cast<int>(plan.size()), fc});
  }

  std::vector<Date> dates;
  for (sys_days d = sys_days{year{config.year} / January / 1};
       d <= sys_days{year{config.year} / December / 31}; d += days{1})
    dates.emplace_back(d);

  double calendar_mean = 0.0;
  for (const auto& d : dates)
    calendar_mean += config.monthly_factors[static_cast<std::size_t>(month_index(d))] *
                     config.dow_factors[static_cast<std::size_t>(weekday_index(d))];
  calendar_mean /= static_cast<double>(dates.size());

  const double sigma = config.noise_sigma;
  std::vector<StationOutput> outputs(plan.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const auto& p = plan[s];
    Rng rng = Rng::substream(config.seed, "synth", static_cast<std::uint64_t>(p.index));
    const auto [lo, hi] = config.aadt_range.at(p.fc);
    const double base = rng.uniform(lo, hi);
    const std::string id = station_name(p.index);

    auto& out = outputs[s];
    out.truth = {id, p.fc, base, base * calendar_mean};

    const double link = config.socio_aadt_link;
    const double rel = hi > lo ? (base - lo) / (hi - lo) : 0.5;
    auto socio = [&](double a, double b) {
      return a + (b - a) * ((1.0 - link) * rng.uniform() + link * rel);
    };
    out.meta.station = id;
    out.meta.functional_class = p.fc;
    out.meta.urban = rng.bernoulli(0.5);
    out.meta.income = std::round(socio(25000.0, 90000.0));
    out.meta.employment = std::round(socio(1000.0, 50000.0));
    out.meta.pct_below_poverty = std::round(socio(5.0, 35.0) * 10.0) / 10.0;
    out.meta.vehicles = std::round(socio(1000.0, 60000.0));
    out.meta.housing_units = std::round(socio(500.0, 40000.0));

    out.days.reserve(dates.size());
    for (const auto& d : dates) {
      DayCount day{id, d, {}};
      const double level = base * config.monthly_factors[static_cast<std::size_t>(month_index(d))] *
                           config.dow_factors[static_cast<std::size_t>(weekday_index(d))];
      const bool day_missing = rng.bernoulli(config.missing_day_rate);
      for (std::size_t h = 0; h < 24; ++h) {
        double eps = 1.0;
        if (sigma > 0.0) eps = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
        double v = level * config.hourly_profile[h] * eps;
        if (config.mode == SynthMode::Realistic) v = std::round(v);
        const bool hour_missing = rng.bernoulli(config.missing_hour_rate);
        if (!day_missing && !hour_missing) day.hours[h] = v;
      }
      out.days.push_back(std::move(day));
    }
  }

  SynthCorpus corpus;
  corpus.truth.monthly_factors = config.monthly_factors;
  corpus.truth.dow_factors = config.dow_factors;
  corpus.truth.hourly_profile = config.hourly_profile;
  for (auto& o : outputs) {
    corpus.counts.insert(corpus.counts.end(), std::make_move_iterator(o.days.begin()),
                         std::make_move_iterator(o.days.end()));
    corpus.meta.push_back(o.meta);
    corpus.truth.stations.push_back(o.truth);
  }
  return corpus;
}

void write_truth(std::ostream& out, const SynthTruth& truth) {
  out << "station_id,true_aadt\n";
  for (const auto& s : truth.stations)
    out << s.station << ',' << csv::format_double(s.true_aadt) << '\n';
}

std::map<StationId, double> read_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim_cr(line) != "station_id,true_aadt")
    throw DataError("truth CSV header mismatch: expected 'station_id,true_aadt'");
  std::map<StationId, double> truth;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto cells = csv::split(text);
    const auto v = cells.size() == 2 ? csv::parse_double(cells[1]) : std::nullopt;
    if (!v || !(*v > 0.0))
      throw DataError("truth CSV line " + std::to_string(lineno) + " is malformed");
    truth[std::string(cells[0])] = *v;
  }
  return truth;
}

}  // namespace aadt
