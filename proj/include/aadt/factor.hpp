#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aadt/corpus.hpp"

namespace aadt::factor {

struct GroupFactors {
  std::array<double, 12> monthly{};  // AADT / MADT, index 0 = January
  std::vector<StationId> stations;   // provenance
};

struct FactorTable {
  std::map<FunctionalClass, GroupFactors> groups;
  double axle_correction = 1.0;

  const GroupFactors& group(FunctionalClass fc) const;  // DataError when absent
};

// Monthly factors per functional class: for each station, f(s,m) =
// AADT(s)/MADT(s,m) with AADT(s) the mean of its monthly MADTs; the group
// factor is the unweighted mean of station factors. Stations without
// metadata are skipped. Restrict to `stations` when non-empty.
FactorTable build_factors(const CleanCorpus& corpus, const std::vector<StationId>& stations = {},
                          double axle_correction = 1.0);

// daily total * monthly factor * axle correction.
double estimate(const DayCount& day, const FactorTable& table, FunctionalClass group);

nlohmann::json to_json(const FactorTable& t);
FactorTable table_from_json(const nlohmann::json& j);

}  // namespace aadt::factor
