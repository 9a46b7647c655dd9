#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "aadt/corpus.hpp"

namespace aadt {

enum class SynthMode { Exact, Realistic };

struct SynthConfig {
  std::map<FunctionalClass, int> stations_per_class;
  std::map<FunctionalClass, std::pair<double, double>> aadt_range;
  std::array<double, 12> monthly_factors;
  std::array<double, 7> dow_factors;  // index 0 = Monday
  std::array<double, 24> hourly_profile;
  double noise_sigma = 0.1;
  double missing_day_rate = 0.0;
  double missing_hour_rate = 0.0;
  int year = 2011;
  SynthMode mode = SynthMode::Realistic;
  std::uint64_t seed = 42;
  // Linear link of socio attributes to AADT; 0 draws them independently.
  double socio_aadt_link = 0.0;

  // 30 interstate-like + 30 arterial-like stations with sinusoidal monthly
  // (+-amplitude) and weekday/weekend (+-amplitude) structure and a
  // two-peak commuter hourly profile.
  static SynthConfig standard(double monthly_amplitude = 0.20, double dow_amplitude = 0.15);

  // Throws UsageError naming the violated invariant.
  void validate() const;
};

struct StationTruth {
  StationId station;
  FunctionalClass functional_class;
  double base_aadt = 0.0;  // planted level before calendar factors
  double true_aadt = 0.0;  // expected mean daily total over the year
};

struct SynthTruth {
  std::vector<StationTruth> stations;
  std::array<double, 12> monthly_factors{};
  std::array<double, 7> dow_factors{};
  std::array<double, 24> hourly_profile{};

  const StationTruth* find(const StationId& id) const;
};

struct SynthCorpus {
  std::vector<DayCount> counts;
  std::vector<StationMeta> meta;
  SynthTruth truth;
};

// volume(s,d,h) = base_s * m[month] * w[dow] * p[h] * eps, eps lognormal with
// mean 1. Each station draws from its own substream of (seed, index), so
// stations are generated in parallel and the output does not depend on the
// thread count.
SynthCorpus generate(const SynthConfig& config);

void write_truth(std::ostream& out, const SynthTruth& truth);
// Reads `station_id,true_aadt`.
std::map<StationId, double> read_truth(std::istream& in);

}  // namespace aadt
