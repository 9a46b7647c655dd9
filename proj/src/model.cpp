#include "aadt/model.hpp"

#include <fstream>

#include "aadt/error.hpp"

namespace aadt {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Svr: return "svr";
    case Method::Ann: return "ann";
    case Method::Ols: return "ols";
    case Method::Factor: return "factor";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::Svr, Method::Ann, Method::Ols, Method::Factor})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Method ModelArtifact::method() const { return static_cast<Method>(model.index()); }

Prediction ModelArtifact::predict(const DayCount& day, const StationMeta* meta) const {
  const double total = daily_total(day);
  if (!(total > 0.0)) throw DataError("cannot predict from a zero-total day");
  Prediction p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, svr::Model>) {
          p.factor = m.predict(feature_row(day, meta, m.columns));
          p.aadt = p.factor * total;
        } else if constexpr (std::is_same_v<T, ann::Model>) {
          p.factor = m.forward(feature_row(day, meta, m.columns));
          p.aadt = p.factor * total;
        } else if constexpr (std::is_same_v<T, ols::Model>) {
          p.aadt = ols::predict_aadt(m, day, meta);
          p.factor = p.aadt / total;
        } else {
          if (!meta) throw DataError("station '" + day.station + "' has no functional class for the factor method");
          p.aadt = factor::estimate(day, m, meta->functional_class);
          p.factor = p.aadt / total;
        }
      },
      model);
  return p;
}

nlohmann::json to_json(const AlternativeSpec& alt) {
  std::vector<std::string> socio;
  for (auto f : alt.socio_fields) socio.emplace_back(to_string(f));
  const char* filter = alt.row_filter == RowFilter::All          ? "all"
                       : alt.row_filter == RowFilter::MondayOnly ? "monday_only"
                                                                 : "january_only";
  return {{"id", alt.id},
          {"volume_form", alt.volume_form == VolumeForm::Factors ? "factors" : "raw_counts"},
          {"use_day_onehot", alt.use_day_onehot},
          {"use_month_onehot", alt.use_month_onehot},
          {"socio_fields", socio},
          {"row_filter", filter},
          {"scope", std::string(to_string(alt.scope))},
          {"reconstructed", alt.reconstructed}};
}

AlternativeSpec alternative_from_json(const nlohmann::json& j) {
  AlternativeSpec a;
  a.id = j.at("id").get<int>();
  a.volume_form = j.at("volume_form") == "factors" ? VolumeForm::Factors : VolumeForm::RawCounts;
  a.use_day_onehot = j.at("use_day_onehot").get<bool>();
  a.use_month_onehot = j.at("use_month_onehot").get<bool>();
  for (const auto& s : j.at("socio_fields")) {
    const auto f = parse_socio_field(s.get<std::string>());
    if (!f) throw DataError("unknown socio field in artifact");
    a.socio_fields.push_back(*f);
  }
  const auto filter = j.at("row_filter").get<std::string>();
  a.row_filter = filter == "all" ? RowFilter::All : filter == "monday_only" ? RowFilter::MondayOnly : RowFilter::JanuaryOnly;
  const auto scope = parse_scope(j.at("scope").get<std::string>());
  if (!scope) throw DataError("unknown scope in artifact");
  a.scope = *scope;
  a.reconstructed = j.value("reconstructed", false);
  a.validate();
  return a;
}

nlohmann::json to_json(const ModelArtifact& a) {
  nlohmann::json j = std::visit(
      [](const auto& m) -> nlohmann::json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, svr::Model>) return svr::to_json(m);
        else if constexpr (std::is_same_v<T, ann::Model>) return ann::to_json(m);
        else if constexpr (std::is_same_v<T, ols::Model>) return ols::to_json(m);
        else return factor::to_json(m);
      },
      a.model);
  j["alternative"] = to_json(a.alt);
  j["selected_hours"] = a.selected_hours;
  j["train_stations"] = a.train_stations;
  j["manifest"] = a.manifest;
  return j;
}

ModelArtifact artifact_from_json(const nlohmann::json& j) {
  ModelArtifact a;
  const auto kind = j.value("kind", "");
  if (kind == "svr") a.model = svr::model_from_json(j);
  else if (kind == "ann") a.model = ann::model_from_json(j);
  else if (kind == "ols") a.model = ols::model_from_json(j);
  else if (kind == "factor") a.model = factor::table_from_json(j);
  else throw DataError("unknown model kind '" + kind + "'");
  a.alt = alternative_from_json(j.at("alternative"));
  a.selected_hours = j.value("selected_hours", std::vector<int>{});
  a.train_stations = j.value("train_stations", std::vector<StationId>{});
  a.manifest = j.value("manifest", nlohmann::json::object());
  return a;
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model artifact '" + path.string() + "'");
  out << to_json(a).dump(2) << '\n';
  if (!out) throw DataError("failed writing model artifact '" + path.string() + "'");
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model artifact '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model artifact '" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    return artifact_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model artifact '" + path.string() + "' is malformed: " + e.what());
  }
}

}  // namespace aadt
