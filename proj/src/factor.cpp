#include "aadt/factor.hpp"

#include <algorithm>
#include <cmath>

#include "aadt/error.hpp"
#include "aadt/features.hpp"

namespace aadt::factor {

namespace {
constexpr const char* kMonthNames[12] = {"January", "February", "March",     "April",
                                         "May",     "June",     "July",      "August",
                                         "September", "October", "November", "December"};
}

const GroupFactors& FactorTable::group(FunctionalClass fc) const {
  const auto it = groups.find(fc);
  if (it == groups.end())
    throw DataError("factor table has no group '" + std::string(to_string(fc)) + "'");
  return it->second;
}

FactorTable build_factors(const CleanCorpus& corpus, const std::vector<StationId>& stations,
                          double axle_correction) {
  if (!(axle_correction > 0.0)) throw UsageError("axle correction must be positive");
  struct Accum {
    std::array<double, 12> sum{};
    std::array<int, 12> count{};
    std::vector<StationId> ids;
  };
  std::map<FunctionalClass, Accum> acc;

  for (const auto& [id, s] : corpus.stations()) {
    if (!stations.empty() && std::find(stations.begin(), stations.end(), id) == stations.end()) continue;
    if (!s.meta) continue;
    std::array<double, 12> total{};
    std::array<int, 12> days{};
    for (const auto& d : s.days) {
      const auto m = static_cast<std::size_t>(month_index(d.date));
      total[m] += daily_total(d);
      ++days[m];
    }
    // Station AADT is the mean of its monthly averages (months with data).
    std::array<double, 12> madt{};
    double aadt = 0.0;
    int months = 0;
    for (std::size_t m = 0; m < 12; ++m) {
      if (days[m] == 0) continue;
      madt[m] = total[m] / days[m];
      aadt += madt[m];
      ++months;
    }
    if (months == 0) continue;
    aadt /= months;
    auto& a = acc[s.meta->functional_class];
    for (std::size_t m = 0; m < 12; ++m) {
      if (days[m] == 0) continue;
      a.sum[m] += aadt / madt[m];
      ++a.count[m];
    }
    a.ids.push_back(id);
  }

  FactorTable table;
  table.axle_correction = axle_correction;
  for (auto& [fc, a] : acc) {
    GroupFactors g;
    for (std::size_t m = 0; m < 12; ++m) {
      if (a.count[m] == 0)
        throw DataError("group '" + std::string(to_string(fc)) + "' has no data for " + kMonthNames[m]);
      g.monthly[m] = a.sum[m] / a.count[m];
    }
    g.stations = std::move(a.ids);
    table.groups.emplace(fc, std::move(g));
  }
  if (table.groups.empty()) throw DataError("no station with functional-class metadata to build factors");
  return table;
}

double estimate(const DayCount& day, const FactorTable& table, FunctionalClass group) {
  const auto& g = table.group(group);
  return daily_total(day) * g.monthly[static_cast<std::size_t>(month_index(day.date))] *
         table.axle_correction;
}

nlohmann::json to_json(const FactorTable& t) {
  nlohmann::json j;
  j["kind"] = "factor";
  j["version"] = 1;
  j["axle_correction"] = t.axle_correction;
  auto groups = nlohmann::json::object();
  for (const auto& [fc, g] : t.groups)
    groups[std::string(to_string(fc))] = {
        {"monthly", std::vector<double>(g.monthly.begin(), g.monthly.end())},
        {"stations", g.stations}};
  j["groups"] = groups;
  return j;
}

FactorTable table_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "factor") throw DataError("model artifact is not a factor table");
  FactorTable t;
  t.axle_correction = j.at("axle_correction").get<double>();
  for (const auto& [name, g] : j.at("groups").items()) {
    const auto fc = parse_functional_class(name);
    if (!fc) throw DataError("factor table: unknown group '" + name + "'");
    GroupFactors gf;
    const auto m = g.at("monthly").get<std::vector<double>>();
    if (m.size() != 12) throw DataError("factor table: group '" + name + "' needs 12 factors");
    std::copy(m.begin(), m.end(), gf.monthly.begin());
    for (double v : gf.monthly)
      if (!(v > 0.0) || !std::isfinite(v)) throw DataError("factor table: non-positive factor");
    gf.stations = g.at("stations").get<std::vector<StationId>>();
    t.groups.emplace(*fc, std::move(gf));
  }
  return t;
}

}  // namespace aadt::factor
