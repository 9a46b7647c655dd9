#include "aadt/ols.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>

#include "aadt/error.hpp"
#include "aadt/features.hpp"
#include "aadt/kernels.hpp"
#include "aadt/linalg.hpp"

namespace aadt::ols {

namespace {

std::vector<std::string> default_names(Eigen::Index p, std::vector<std::string> names) {
  if (names.empty())
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  if (static_cast<Eigen::Index>(names.size()) != p) throw UsageError("OLS: one name per column required");
  return names;
}

double total_ss(const Eigen::VectorXd& y) {
  return (y.array() - y.mean()).square().sum();
}

double r_squared(double sse, double sst) {
  if (!(sst > 0.0)) return 0.0;
  return std::clamp(1.0 - sse / sst, 0.0, 1.0);
}

// p-value of the partial F test for one extra column.
double partial_f_p(double sse_reduced, double sse_full, int df) {
  if (df <= 0) return 1.0;
  const double gain = std::max(0.0, sse_reduced - sse_full);
  if (!(sse_full > 0.0)) return gain > 0.0 ? 0.0 : 1.0;
  const double F = gain / (sse_full / df);
  const boost::math::fisher_f dist(1.0, static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, F));
}

Model build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names,
            std::vector<int> cols) {
  std::sort(cols.begin(), cols.end());
  const auto sub = select_columns(X, cols);
  const auto f = least_squares(sub, y, true);
  if (!f.full_rank) {
    std::string dep;
    for (auto k : f.dependent_columns) dep += (dep.empty() ? "" : ", ") + names[static_cast<std::size_t>(cols[static_cast<std::size_t>(k)])];
    if (dep.empty()) dep = "intercept-collinear column";
    throw DataError("OLS design is rank deficient; dependent columns: " + dep);
  }
  Model m;
  m.intercept = f.intercept;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    m.columns.push_back(names[static_cast<std::size_t>(cols[k])]);
    m.coefficients.push_back(f.coef(static_cast<Eigen::Index>(k)));
  }
  m.sse = f.rss;
  m.residual_df = static_cast<int>(X.rows()) - static_cast<int>(cols.size()) - 1;
  m.r2 = r_squared(f.rss, total_ss(y));
  return m;
}

}  // namespace

double Model::predict(std::span<const std::string> names, const Eigen::VectorXd& values) const {
  double v = intercept;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto it = std::find(names.begin(), names.end(), columns[k]);
    if (it == names.end()) throw DataError("OLS predict: missing column '" + columns[k] + "'");
    v += coefficients[k] * values(it - names.begin());
  }
  return v;
}

double Model::coefficient(std::string_view column) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == column) return coefficients[k];
  return 0.0;
}

Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> names) {
  if (X.rows() != y.size()) throw UsageError("OLS: X/y row mismatch");
  if (X.rows() <= X.cols()) throw DataError("OLS needs more rows than columns");
  names = default_names(X.cols(), std::move(names));
  std::vector<int> cols(static_cast<std::size_t>(X.cols()));
  for (int j = 0; j < X.cols(); ++j) cols[static_cast<std::size_t>(j)] = j;
  return build(X, y, names, cols);
}

void StepwiseConfig::validate() const {
  if (!(p_enter > 0.0 && p_enter <= p_remove && p_remove < 1.0))
    throw UsageError("stepwise thresholds must satisfy 0 < p_enter <= p_remove < 1");
  if (max_steps < 1) throw UsageError("stepwise max_steps must be >= 1");
}

Model stepwise(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const StepwiseConfig& cfg,
               std::vector<std::string> names) {
  cfg.validate();
  if (X.rows() != y.size()) throw UsageError("OLS: X/y row mismatch");
  if (X.rows() < 3) throw DataError("stepwise needs at least 3 rows");
  names = default_names(X.cols(), std::move(names));
  const int n = static_cast<int>(X.rows());

  std::vector<int> included;
  std::vector<StepEvent> trace;
  auto sse_of = [&](const std::vector<int>& cols) {
    return least_squares(select_columns(X, cols), y, true).rss;
  };

  for (int step = 0; step < cfg.max_steps; ++step) {
    bool changed = false;

    std::vector<int> candidates;
    for (int j = 0; j < X.cols(); ++j)
      if (std::find(included.begin(), included.end(), j) == included.end()) candidates.push_back(j);
    if (!candidates.empty()) {
      const double sse_reduced = sse_of(included);
      const auto rss = kernels::candidate_rss(X, y, included, candidates, true);
      const int df = n - static_cast<int>(included.size()) - 2;
      int best = -1;
      double best_p = 2.0;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (std::isnan(rss[c])) continue;
        const double p = partial_f_p(sse_reduced, rss[c], df);
        if (p < best_p) best_p = p, best = candidates[c];
      }
      if (best >= 0 && best_p < cfg.p_enter) {
        included.push_back(best);
        std::sort(included.begin(), included.end());
        trace.push_back({true, names[static_cast<std::size_t>(best)], best_p});
        changed = true;
      }
    }

    if (!included.empty()) {
      const double sse_full = sse_of(included);
      const int df = n - static_cast<int>(included.size()) - 1;
      int worst = -1;
      double worst_p = -1.0;
      for (int j : included) {
        std::vector<int> reduced;
        for (int k : included)
          if (k != j) reduced.push_back(k);
        const double p = partial_f_p(sse_of(reduced), sse_full, df);
        if (p > worst_p) worst_p = p, worst = j;
      }
      if (worst >= 0 && worst_p > cfg.p_remove) {
        included.erase(std::find(included.begin(), included.end(), worst));
        trace.push_back({false, names[static_cast<std::size_t>(worst)], worst_p});
        changed = true;
      }
    }
    if (!changed) break;
  }

  Model m = build(X, y, names, included);
  m.trace = std::move(trace);
  return m;
}

CorrelationReport correlation_check(const Eigen::MatrixXd& X, double threshold) {
  if (X.rows() < 2) throw DataError("correlation_check needs at least 2 rows");
  CorrelationReport report;
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm().transpose();
  for (int j = 0; j < X.cols(); ++j)
    if (!(norms(j) > 1e-12 * std::max(1.0, X.col(j).cwiseAbs().maxCoeff()))) report.zero_variance.push_back(j);
  auto zero = [&](int j) {
    return std::find(report.zero_variance.begin(), report.zero_variance.end(), j) != report.zero_variance.end();
  };
  for (int a = 0; a < X.cols(); ++a) {
    if (zero(a)) continue;
    for (int b = a + 1; b < X.cols(); ++b) {
      if (zero(b)) continue;
      const double r = centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b));
      if (std::abs(r) >= threshold) report.pairs.push_back({a, b, r});
    }
  }
  return report;
}

double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta) {
  const auto x = feature_row(day, meta, model.columns);
  return model.predict(model.columns, x);
}

nlohmann::json to_json(const Model& m) {
  nlohmann::json j;
  j["kind"] = "ols";
  j["version"] = 1;
  j["intercept"] = m.intercept;
  j["columns"] = m.columns;
  auto coef = nlohmann::json::object();
  for (std::size_t k = 0; k < m.columns.size(); ++k) coef[m.columns[k]] = m.coefficients[k];
  j["coefficients"] = coef;
  j["residual_df"] = m.residual_df;
  j["r2"] = m.r2;
  j["sse"] = m.sse;
  auto trace = nlohmann::json::array();
  for (const auto& e : m.trace)
    trace.push_back({{"op", e.added ? "add" : "remove"}, {"column", e.column}, {"p_value", e.p_value}});
  j["trace"] = trace;
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "ols") throw DataError("model artifact is not an OLS model");
  Model m;
  m.intercept = j.at("intercept").get<double>();
  m.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& c : m.columns) m.coefficients.push_back(j.at("coefficients").at(c).get<double>());
  m.residual_df = j.value("residual_df", 0);
  m.r2 = j.value("r2", 0.0);
  m.sse = j.value("sse", 0.0);
  for (const auto& e : j.value("trace", nlohmann::json::array()))
    m.trace.push_back({e.at("op") == "add", e.at("column").get<std::string>(), e.at("p_value").get<double>()});
  return m;
}

}  // namespace aadt::ols
