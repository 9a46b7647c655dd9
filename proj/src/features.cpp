#include "aadt/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "aadt/error.hpp"
#include "aadt/kernels.hpp"
#include "aadt/rng.hpp"
#include "csv.hpp"

namespace aadt {

double daily_total(const DayCount& day) {
  double t = 0.0;
  for (const auto& h : day.hours) {
    if (!h) throw DataError("daily_total on incomplete day " + day.station + " " + format_date(day.date));
    t += *h;
  }
  return t;
}

std::array<double, 24> hourly_factors(const DayCount& day) {
  const double total = daily_total(day);
  if (!(total > 0.0))
    throw DataError("zero daily total for " + day.station + " " + format_date(day.date));
  std::array<double, 24> f{};
  for (std::size_t h = 0; h < 24; ++h) f[h] = *day.hours[h] / total;
  return f;
}

double ground_truth_aadt(std::span<const DayCount> days) {
  if (days.empty()) throw DataError("ground_truth_aadt needs at least one day");
  double sum = 0.0;
  for (const auto& d : days) sum += daily_total(d);
  return sum / static_cast<double>(days.size());
}

double aadt_factor(const DayCount& day, double aadt) {
  const double total = daily_total(day);
  if (!(total > 0.0) || !(aadt > 0.0)) throw DataError("aadt_factor needs positive AADT and total");
  return aadt / total;
}

CalendarEncoding encode_calendar(const Date& date) {
  CalendarEncoding e;
  e.day[static_cast<std::size_t>(weekday_index(date))] = 1;
  e.month[static_cast<std::size_t>(month_index(date))] = 1;
  return e;
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::InterstateExpressway: return "interstate";
    case Scope::PrincipalMinorArterial: return "arterial";
    case Scope::AllAtr: return "all";
  }
  return "unknown";
}

std::optional<Scope> parse_scope(std::string_view s) {
  for (auto sc : {Scope::InterstateExpressway, Scope::PrincipalMinorArterial, Scope::AllAtr})
    if (to_string(sc) == s) return sc;
  return std::nullopt;
}

std::string_view to_string(SocioField f) {
  switch (f) {
    case SocioField::Urban: return "urban";
    case SocioField::Income: return "income";
    case SocioField::Employment: return "employment";
    case SocioField::PctBelowPoverty: return "pct_below_poverty";
    case SocioField::Vehicles: return "vehicles";
    case SocioField::HousingUnits: return "housing_units";
  }
  return "unknown";
}

std::optional<SocioField> parse_socio_field(std::string_view s) {
  for (auto f : kAllSocio)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

bool in_scope(const StationData& station, Scope scope) {
  switch (scope) {
    case Scope::AllAtr: return true;
    case Scope::InterstateExpressway:
      return station.meta && station.meta->functional_class == FunctionalClass::InterstateExpressway;
    case Scope::PrincipalMinorArterial:
      return station.meta &&
             station.meta->functional_class == FunctionalClass::PrincipalMinorArterial;
  }
  return false;
}

void AlternativeSpec::validate() const {
  if (id < 1 || id > 9) throw UsageError("alternative id must lie in 1..9");
  if (scope == Scope::AllAtr && !socio_fields.empty())
    throw UsageError("alternative " + std::to_string(id) +
                     " uses socio-economic features, which the all-ATR scope does not allow");
}

AlternativeSpec alternative(int id, Scope scope) {
  AlternativeSpec a;
  a.id = id;
  a.scope = scope;
  switch (id) {
    case 1:
      a.use_day_onehot = a.use_month_onehot = false;
      a.socio_fields.assign(kAllSocio.begin(), kAllSocio.end());
      a.reconstructed = true;
      break;
    case 2: break;
    case 3: a.use_day_onehot = a.use_month_onehot = false; break;
    case 4: a.row_filter = RowFilter::MondayOnly; break;
    case 5: a.row_filter = RowFilter::JanuaryOnly; break;
    case 6:
      a.socio_fields = {SocioField::Urban};
      a.reconstructed = true;
      break;
    case 7:
      a.socio_fields = {SocioField::Income, SocioField::Employment};
      a.reconstructed = true;
      break;
    case 8:
      a.socio_fields = {SocioField::PctBelowPoverty, SocioField::Vehicles};
      a.reconstructed = true;
      break;
    case 9:
      a.socio_fields.assign(kAllSocio.begin(), kAllSocio.end());
      a.reconstructed = true;
      break;
    default: throw UsageError("alternative id must lie in 1..9");
  }
  a.validate();
  return a;
}

int DesignMatrix::column_index(std::string_view name) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<int>(j);
  return -1;
}

DesignMatrix DesignMatrix::subset(const std::vector<Eigen::Index>& rows) const {
  DesignMatrix out;
  out.columns = columns;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.X.resize(n, X.cols());
  out.target.resize(n);
  out.day_total.resize(n);
  out.station_aadt.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto r = rows[static_cast<std::size_t>(k)];
    out.station.push_back(station[static_cast<std::size_t>(r)]);
    out.date.push_back(date[static_cast<std::size_t>(r)]);
    out.X.row(k) = X.row(r);
    out.target(k) = target(r);
    out.day_total(k) = day_total(r);
    out.station_aadt(k) = station_aadt(r);
  }
  return out;
}

std::vector<std::string> feature_columns(const AlternativeSpec& alt,
                                         std::span<const int> selected_hours,
                                         std::span<const FunctionalClass> indicator_classes) {
  std::vector<int> hours(selected_hours.begin(), selected_hours.end());
  std::sort(hours.begin(), hours.end());
  if (std::adjacent_find(hours.begin(), hours.end()) != hours.end())
    throw UsageError("selected hours contain duplicates");
  std::vector<std::string> cols;
  char buf[16];
  for (int h : hours) {
    if (h < 0 || h > 23) throw UsageError("selected hour out of range 0..23");
    std::snprintf(buf, sizeof buf, alt.volume_form == VolumeForm::Factors ? "hf%02d" : "v%02d", h);
    cols.emplace_back(buf);
  }
  if (alt.use_day_onehot)
    for (int d = 0; d < 7; ++d) cols.push_back("dow" + std::to_string(d));
  if (alt.use_month_onehot)
    for (int m = 0; m < 12; ++m) {
      std::snprintf(buf, sizeof buf, "mon%02d", m);
      cols.emplace_back(buf);
    }
  for (auto f : kAllSocio)
    if (std::find(alt.socio_fields.begin(), alt.socio_fields.end(), f) != alt.socio_fields.end())
      cols.emplace_back(to_string(f));
  for (auto fc : indicator_classes) cols.push_back("fc_" + std::string(to_string(fc)));
  return cols;
}

Eigen::VectorXd feature_row(const DayCount& day, const StationMeta* meta,
                            std::span<const std::string> columns) {
  Eigen::VectorXd row(static_cast<Eigen::Index>(columns.size()));
  std::optional<std::array<double, 24>> factors;
  const auto cal = encode_calendar(day.date);
  auto need_meta = [&](std::string_view col) -> const StationMeta& {
    if (!meta)
      throw DataError("station '" + day.station + "' has no socio/class metadata for column '" +
                      std::string(col) + "'");
    return *meta;
  };
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const std::string& c = columns[j];
    double v = 0.0;
    if (c.size() == 4 && c.starts_with("hf")) {
      if (!factors) factors = hourly_factors(day);
      v = (*factors)[static_cast<std::size_t>(std::stoi(c.substr(2)))];
    } else if (c.size() == 3 && c[0] == 'v') {
      const auto& h = day.hours[static_cast<std::size_t>(std::stoi(c.substr(1)))];
      if (!h) throw DataError("missing hour in " + day.station + " " + format_date(day.date));
      v = *h;
    } else if (c.starts_with("dow")) {
      v = cal.day[static_cast<std::size_t>(std::stoi(c.substr(3)))];
    } else if (c.starts_with("mon")) {
      v = cal.month[static_cast<std::size_t>(std::stoi(c.substr(3)))];
    } else if (c.starts_with("fc_")) {
      v = to_string(need_meta(c).functional_class) == c.substr(3) ? 1.0 : 0.0;
    } else if (const auto f = parse_socio_field(c)) {
      const auto& m = need_meta(c);
      switch (*f) {
        case SocioField::Urban: v = m.urban ? 1.0 : 0.0; break;
        case SocioField::Income: v = m.income; break;
        case SocioField::Employment: v = m.employment; break;
        case SocioField::PctBelowPoverty: v = m.pct_below_poverty; break;
        case SocioField::Vehicles: v = m.vehicles; break;
        case SocioField::HousingUnits: v = m.housing_units; break;
      }
    } else {
      throw UsageError("unknown feature column '" + c + "'");
    }
    row(static_cast<Eigen::Index>(j)) = v;
  }
  return row;
}

namespace {

bool passes_filter(const DayCount& d, RowFilter f) {
  switch (f) {
    case RowFilter::All: return true;
    case RowFilter::MondayOnly: return weekday_index(d.date) == 0;
    case RowFilter::JanuaryOnly: return month_index(d.date) == 0;
  }
  return false;
}

}  // namespace

DesignMatrix assemble(const CleanCorpus& corpus, const AlternativeSpec& alt,
                      std::span<const int> selected_hours, TargetKind target,
                      const AssembleOptions& options) {
  alt.validate();
  std::vector<StationId> ids;
  if (options.stations) {
    ids = *options.stations;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (const auto& id : ids)
      if (!in_scope(corpus.station(id), alt.scope))
        throw DataError("station '" + id + "' is outside scope " + std::string(to_string(alt.scope)));
  } else {
    ids = scope_stations(corpus, alt.scope);
  }
  if (ids.empty()) throw DataError("no stations in scope " + std::string(to_string(alt.scope)));

  if (!alt.socio_fields.empty() || options.class_indicators)
    for (const auto& id : ids)
      if (!corpus.station(id).has_socio())
        throw DataError("station '" + id + "' has no socio data required by alternative " +
                        std::to_string(alt.id));

  std::vector<FunctionalClass> indicators;
  if (options.class_indicators) {
    std::set<FunctionalClass> present;
    for (const auto& id : ids) present.insert(corpus.station(id).meta->functional_class);
    indicators.assign(present.begin(), present.end());
    if (!indicators.empty()) indicators.erase(indicators.begin());
  }

  DesignMatrix m;
  m.columns = feature_columns(alt, selected_hours, indicators);

  std::vector<std::pair<const DayCount*, const StationMeta*>> rows;
  std::vector<double> aadts;
  for (const auto& id : ids) {
    const auto& s = corpus.station(id);
    const double aadt = ground_truth_aadt(s.days);
    const StationMeta* meta = s.meta ? &*s.meta : nullptr;
    for (const auto& d : s.days)
      if (passes_filter(d, alt.row_filter)) {
        rows.emplace_back(&d, meta);
        aadts.push_back(aadt);
      }
  }
  if (rows.empty()) throw DataError("design matrix is empty after filtering");

  const auto n = static_cast<Eigen::Index>(rows.size());
  m.X.resize(n, static_cast<Eigen::Index>(m.columns.size()));
  m.target.resize(n);
  m.day_total.resize(n);
  m.station_aadt.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& [day, meta] = rows[static_cast<std::size_t>(r)];
    m.station.push_back(day->station);
    m.date.push_back(day->date);
    m.X.row(r) = feature_row(*day, meta, m.columns).transpose();
    const double total = daily_total(*day);
    const double aadt = aadts[static_cast<std::size_t>(r)];
    m.day_total(r) = total;
    m.station_aadt(r) = aadt;
    m.target(r) = target == TargetKind::AadtFactor ? aadt / total : aadt;
  }
  return m;
}

void write_design_matrix(std::ostream& out, const DesignMatrix& m) {
  out << "station_id,date";
  for (const auto& c : m.columns) out << ',' << c;
  out << ",target\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << m.station[static_cast<std::size_t>(r)] << ',' << format_date(m.date[static_cast<std::size_t>(r)]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << csv::format_double(m.X(r, j));
    out << ',' << csv::format_double(m.target(r)) << '\n';
  }
}

std::vector<StationId> scope_stations(const CleanCorpus& corpus, Scope scope) {
  std::vector<StationId> ids;
  for (const auto& [id, s] : corpus.stations())
    if (in_scope(s, scope)) ids.push_back(id);
  return ids;
}

StationSplit split_stations(std::vector<StationId> stations, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw UsageError("train_fraction must lie in (0,1)");
  if (stations.size() < 3) throw DataError("split needs at least 3 stations in scope");
  std::sort(stations.begin(), stations.end());
  auto rng = Rng::substream(spec.seed, "split");
  rng.shuffle(stations);
  // ceil(n * fraction) with a guard against 2/3 rounding up past an integer.
  const double raw = static_cast<double>(stations.size()) * spec.train_fraction;
  auto n_train = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, stations.size() - 1);
  StationSplit s;
  s.train.assign(stations.begin(), stations.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(stations.begin() + static_cast<std::ptrdiff_t>(n_train), stations.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

StationSplit split(const CleanCorpus& corpus, Scope scope, const SplitSpec& spec) {
  return split_stations(scope_stations(corpus, scope), spec);
}

namespace {

template <typename Scorer>
SfsResult run_sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_k, Scorer score) {
  if (max_k < 1 || max_k > X.cols())
    throw UsageError("sfs max_k must lie in 1.." + std::to_string(X.cols()));
  if (X.rows() < max_k + 1) throw DataError("sfs needs more rows than selected columns");
  SfsResult result;
  std::vector<int> remaining(static_cast<std::size_t>(X.cols()));
  for (int j = 0; j < X.cols(); ++j) remaining[static_cast<std::size_t>(j)] = j;
  for (int step = 0; step < max_k; ++step) {
    const auto rss = score(X, y, result.order, remaining);
    std::size_t best = remaining.size();
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      if (std::isnan(rss[c])) continue;
      if (best == remaining.size() || rss[c] < rss[best]) best = c;
    }
    if (best == remaining.size())
      throw NumericalError("sfs: every candidate fit is singular at step " + std::to_string(step + 1));
    result.order.push_back(remaining[best]);
    result.rss_path.push_back(rss[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return result;
}

}  // namespace

SfsResult sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_k) {
  return run_sfs(X, y, max_k, [](const auto&... a) { return kernels::candidate_rss(a...); });
}

SfsResult reference::sfs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_k) {
  return run_sfs(X, y, max_k,
                 [](const auto&... a) { return kernels::reference::candidate_rss(a...); });
}

std::string station_set_hash(std::vector<StationId> stations) {
  std::sort(stations.begin(), stations.end());
  std::uint64_t h = fnv1a64("stations");
  for (const auto& s : stations) {
    h = fnv1a64(s, h);
    h = fnv1a64("\n", h);
  }
  return hex64(h);
}

}  // namespace aadt
