#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aadt/ann.hpp"
#include "aadt/factor.hpp"
#include "aadt/features.hpp"
#include "aadt/ols.hpp"
#include "aadt/svr.hpp"

namespace aadt {

enum class Method { Svr, Ann, Ols, Factor };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

using TrainedModel = std::variant<svr::Model, ann::Model, ols::Model, factor::FactorTable>;

struct Prediction {
  double factor = 0.0;  // predicted AADT factor
  double aadt = 0.0;    // predicted AADT (vehicles/day)
};

// A fitted estimator plus everything needed to rebuild its inputs.
struct ModelArtifact {
  TrainedModel model;
  AlternativeSpec alt;
  std::vector<int> selected_hours;      // selection order
  std::vector<StationId> train_stations;
  nlohmann::json manifest = nlohmann::json::object();

  Method method() const;
  Prediction predict(const DayCount& day, const StationMeta* meta) const;
};

nlohmann::json to_json(const AlternativeSpec& alt);
AlternativeSpec alternative_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelArtifact& a);
ModelArtifact artifact_from_json(const nlohmann::json& j);

void save_artifact(const std::filesystem::path& path, const ModelArtifact& a);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace aadt
