#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aadt/corpus.hpp"

namespace aadt::ols {

struct StepEvent {
  bool added = true;  // false = removed
  std::string column;
  double p_value = 0.0;
};

struct Model {
  double intercept = 0.0;
  std::vector<std::string> columns;  // selected columns, canonical order
  std::vector<double> coefficients;  // aligned with columns
  int residual_df = 0;
  double r2 = 0.0;
  double sse = 0.0;
  std::vector<StepEvent> trace;

  // Looks up each selected column in (names, values); DataError if absent.
  double predict(std::span<const std::string> names, const Eigen::VectorXd& values) const;
  double coefficient(std::string_view column) const;  // 0 when not selected
};

// Intercept OLS on every column of X. DataError naming the dependent columns
// when X is rank deficient.
Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> names = {});

struct StepwiseConfig {
  double p_enter = 0.001;
  double p_remove = 0.01;
  int max_steps = 200;

  void validate() const;
};

// Forward-backward stepwise selection on partial-F p-values; ties go to the
// lowest column index. Candidates whose inclusion makes the design singular
// are skipped.
Model stepwise(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const StepwiseConfig& cfg = {},
               std::vector<std::string> names = {});

struct CorrelatedPair {
  int a = 0;
  int b = 0;
  double r = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelatedPair> pairs;
  std::vector<int> zero_variance;
};

CorrelationReport correlation_check(const Eigen::MatrixXd& X, double threshold = 0.7);

double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta);

nlohmann::json to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);

}  // namespace aadt::ols
