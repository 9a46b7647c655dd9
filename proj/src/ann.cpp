#include "aadt/ann.hpp"

#include <cmath>
#include <limits>

#include "aadt/error.hpp"
#include "aadt/features.hpp"
#include "aadt/rng.hpp"

namespace aadt::ann {

RangeScaler RangeScaler::identity(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

RangeScaler RangeScaler::fit(const Eigen::MatrixXd& X) {
  RangeScaler s;
  const Eigen::VectorXd lo = X.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = X.colwise().maxCoeff().transpose();
  s.center = (lo + hi) / 2.0;
  s.half_range = (hi - lo) / 2.0;
  for (Eigen::Index j = 0; j < s.half_range.size(); ++j)
    if (!(s.half_range(j) > 0.0)) s.half_range(j) = 1.0;
  return s;
}

Eigen::VectorXd RangeScaler::apply(const Eigen::VectorXd& x) const {
  return ((x - center).array() / half_range.array()).matrix();
}

Eigen::MatrixXd RangeScaler::apply_rows(const Eigen::MatrixXd& X) const {
  return ((X.rowwise() - center.transpose()).array().rowwise() / half_range.transpose().array())
      .matrix();
}

Eigen::Index Model::parameter_count() const {
  const Eigen::Index h = topology.n_hidden, in = topology.n_in;
  return h * in + 2 * h + 1;
}

Eigen::VectorXd Model::parameters() const {
  const Eigen::Index h = topology.n_hidden, in = topology.n_in;
  Eigen::VectorXd t(parameter_count());
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index k = 0; k < in; ++k) t(j * in + k) = hidden_weights(j, k);
  t.segment(h * in, h) = hidden_bias;
  t.segment(h * in + h, h) = output_weights;
  t(h * in + 2 * h) = output_bias;
  return t;
}

void Model::set_parameters(const Eigen::VectorXd& t) {
  const Eigen::Index h = topology.n_hidden, in = topology.n_in;
  if (t.size() != parameter_count()) throw UsageError("ANN: parameter vector size mismatch");
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index k = 0; k < in; ++k) hidden_weights(j, k) = t(j * in + k);
  hidden_bias = t.segment(h * in, h);
  output_weights = t.segment(h * in + h, h);
  output_bias = t(h * in + 2 * h);
}

Eigen::VectorXd Model::hidden(const Eigen::VectorXd& xs) const {
  return (hidden_weights * xs + hidden_bias).array().tanh().matrix();
}

double Model::forward_scaled(const Eigen::VectorXd& xs) const {
  if (xs.size() != topology.n_in)
    throw UsageError("ANN forward: expected " + std::to_string(topology.n_in) + " inputs, got " +
                     std::to_string(xs.size()));
  return output_weights.dot(hidden(xs)) + output_bias;
}

Eigen::VectorXd Model::forward_scaled(const Eigen::MatrixXd& Xs) const {
  if (Xs.cols() != topology.n_in) throw UsageError("ANN forward: input width mismatch");
  const Eigen::MatrixXd H =
      ((Xs * hidden_weights.transpose()).rowwise() + hidden_bias.transpose()).array().tanh().matrix();
  return (H * output_weights).array() + output_bias;
}

double Model::forward(const Eigen::VectorXd& x) const {
  if (x.size() != topology.n_in)
    throw UsageError("ANN forward: expected " + std::to_string(topology.n_in) + " inputs, got " +
                     std::to_string(x.size()));
  return forward_scaled(input_scaling.apply(x)) * target_half_range + target_center;
}

Eigen::VectorXd Model::forward(const Eigen::MatrixXd& X) const {
  return (forward_scaled(input_scaling.apply_rows(X)).array() * target_half_range + target_center)
      .matrix();
}

Model zero_model(const Topology& topology) {
  if (topology.n_in < 1 || topology.n_hidden < 1) throw UsageError("ANN topology must be positive");
  Model m;
  m.topology = topology;
  m.hidden_weights = Eigen::MatrixXd::Zero(topology.n_hidden, topology.n_in);
  m.hidden_bias = Eigen::VectorXd::Zero(topology.n_hidden);
  m.output_weights = Eigen::VectorXd::Zero(topology.n_hidden);
  m.input_scaling = RangeScaler::identity(topology.n_in);
  return m;
}

Model init(const Topology& topology, std::uint64_t seed) {
  Model m = zero_model(topology);
  auto rng = Rng::substream(seed, "init", static_cast<std::uint64_t>(topology.n_hidden));
  Eigen::VectorXd t(m.parameter_count());
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = rng.uniform(-0.5, 0.5);
  m.set_parameters(t);
  return m;
}

Eigen::MatrixXd jacobian(const Model& model, const Eigen::MatrixXd& Xs) {
  const Eigen::Index h = model.topology.n_hidden, in = model.topology.n_in;
  if (Xs.cols() != in) throw UsageError("ANN jacobian: input width mismatch");
  Eigen::MatrixXd J(Xs.rows(), model.parameter_count());
  for (Eigen::Index r = 0; r < Xs.rows(); ++r) {
    const Eigen::VectorXd x = Xs.row(r).transpose();
    const Eigen::VectorXd a = model.hidden(x);
    for (Eigen::Index j = 0; j < h; ++j) {
      const double delta = model.output_weights(j) * (1.0 - a(j) * a(j));
      for (Eigen::Index k = 0; k < in; ++k) J(r, j * in + k) = delta * x(k);
      J(r, h * in + j) = delta;
      J(r, h * in + h + j) = a(j);
    }
    J(r, h * in + 2 * h) = 1.0;
  }
  return J;
}

void LmConfig::validate() const {
  if (!(mu0 > 0.0)) throw UsageError("LM mu0 must be positive");
  if (!(mu_increase > 1.0)) throw UsageError("LM mu_increase must exceed 1");
  if (!(mu_decrease > 0.0 && mu_decrease < 1.0)) throw UsageError("LM mu_decrease must lie in (0,1)");
  if (!(mu_max > mu0)) throw UsageError("LM mu_max must exceed mu0");
  if (max_epochs < 1) throw UsageError("LM max_epochs must be >= 1");
  if (patience < 1) throw UsageError("LM patience must be >= 1");
}

TrainResult train_lm(const Model& start, const Dataset& train, const LmConfig& cfg,
                     const std::optional<Dataset>& validation) {
  cfg.validate();
  if (train.X.rows() < 2) throw DataError("LM training needs at least 2 rows");
  if (train.X.rows() != train.y.size()) throw UsageError("LM training: X/y row mismatch");
  if (train.X.cols() != start.topology.n_in) throw UsageError("LM training: input width mismatch");

  TrainResult result{start, {}};
  Model& m = result.model;
  m.input_scaling = RangeScaler::fit(train.X);
  const double lo = train.y.minCoeff(), hi = train.y.maxCoeff();
  m.target_center = (lo + hi) / 2.0;
  m.target_half_range = hi > lo ? (hi - lo) / 2.0 : 1.0;

  const Eigen::MatrixXd Xs = m.input_scaling.apply_rows(train.X);
  const Eigen::VectorXd ys = ((train.y.array() - m.target_center) / m.target_half_range).matrix();

  auto sse_of = [&](const Model& model) {
    const double s = (model.forward_scaled(Xs) - ys).squaredNorm();
    if (!std::isfinite(s)) throw NumericalError("LM: non-finite SSE");
    return s;
  };
  auto val_rmse = [&](const Model& model) {
    const Eigen::VectorXd p = model.forward(validation->X);
    return std::sqrt((p - validation->y).squaredNorm() / static_cast<double>(p.size()));
  };

  auto& log = result.log;
  double sse = sse_of(m);
  double mu = cfg.mu0;
  Eigen::VectorXd theta = m.parameters();
  Eigen::VectorXd best_theta = theta;
  double best_val = validation ? val_rmse(m) : 0.0;
  int fails = 0;

  for (int epoch = 1;; ++epoch) {
    if (sse <= cfg.sse_goal) {
      log.stop_reason = "sse_goal";
      break;
    }
    if (epoch > cfg.max_epochs) {
      log.stop_reason = "max_epochs";
      break;
    }
    const Eigen::MatrixXd J = jacobian(m, Xs);
    const Eigen::VectorXd e = m.forward_scaled(Xs) - ys;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd Jte = J.transpose() * e;

    bool accepted = false;
    while (mu <= cfg.mu_max) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      const Eigen::VectorXd delta = ldlt.solve(Jte);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        log.attempts.push_back({epoch, mu, std::numeric_limits<double>::infinity(), false});
        mu *= cfg.mu_increase;
        continue;
      }
      Model trial = m;
      trial.set_parameters(theta - delta);
      const double trial_sse = (trial.forward_scaled(Xs) - ys).squaredNorm();
      const bool better = std::isfinite(trial_sse) && trial_sse < sse;
      log.attempts.push_back({epoch, mu, trial_sse, better});
      if (better) {
        m = std::move(trial);
        theta = m.parameters();
        sse = trial_sse;
        mu *= cfg.mu_decrease;
        accepted = true;
        break;
      }
      mu *= cfg.mu_increase;
    }
    if (!accepted) {
      log.stop_reason = "mu_max";
      break;
    }
    log.epoch_sse.push_back(sse);
    log.epoch_mu.push_back(mu);

    if (validation) {
      const double v = val_rmse(m);
      log.validation_rmse.push_back(v);
      if (v < best_val) {
        best_val = v;
        best_theta = theta;
        fails = 0;
      } else if (++fails >= cfg.patience) {
        log.stop_reason = "validation";
        break;
      }
    }
  }
  if (validation) m.set_parameters(best_theta);
  return result;
}

HiddenSearch pick_hidden(const std::vector<int>& candidates, const Dataset& train,
                         const Dataset& validation, const LmConfig& cfg,
                         std::vector<std::string> columns) {
  if (candidates.empty()) throw UsageError("pick_hidden: no candidates");
  std::vector<HiddenCandidate> table(candidates.size());
  std::vector<std::optional<TrainResult>> results(candidates.size());
  const auto m = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < m; ++c) {
    const auto k = static_cast<std::size_t>(c);
    auto& row = table[k];
    row.n_hidden = candidates[k];
    try {
      const auto start = init({static_cast<int>(train.X.cols()), candidates[k]}, cfg.seed);
      auto r = train_lm(start, train, cfg, validation);
      const Eigen::VectorXd p = r.model.forward(validation.X);
      row.validation_rmse = std::sqrt((p - validation.y).squaredNorm() / static_cast<double>(p.size()));
      row.train_sse = r.log.epoch_sse.empty() ? 0.0 : r.log.epoch_sse.back();
      row.epochs = static_cast<int>(r.log.epoch_sse.size());
      results[k] = std::move(r);
    } catch (const Error& e) {
      row.failure = e.what();
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!table[k].validation_rmse) continue;
    if (!best || *table[k].validation_rmse < *table[*best].validation_rmse ||
        (*table[k].validation_rmse == *table[*best].validation_rmse &&
         table[k].n_hidden < table[*best].n_hidden))
      best = k;
  }
  if (!best) throw NumericalError("pick_hidden: every candidate failed to train");
  HiddenSearch out{table[*best].n_hidden, std::move(table), std::move(*results[*best])};
  out.best.model.columns = std::move(columns);
  return out;
}

double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta) {
  return model.forward(feature_row(day, meta, model.columns)) * daily_total(day);
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  std::vector<double> data;
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("ANN artifact: matrix size mismatch");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  return M;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }
Eigen::VectorXd vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const Model& m) {
  nlohmann::json j;
  j["kind"] = "ann";
  j["version"] = 1;
  j["columns"] = m.columns;
  j["topology"] = {{"n_in", m.topology.n_in}, {"n_hidden", m.topology.n_hidden}, {"n_out", 1}};
  j["hidden_weights"] = matrix_json(m.hidden_weights);
  j["hidden_bias"] = vec(m.hidden_bias);
  j["output_weights"] = matrix_json(m.output_weights.transpose());
  j["output_bias"] = m.output_bias;
  j["input_scaling"] = {{"center", vec(m.input_scaling.center)},
                        {"half_range", vec(m.input_scaling.half_range)}};
  j["target_scaling"] = {{"center", m.target_center}, {"half_range", m.target_half_range}};
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "ann") throw DataError("model artifact is not an ANN model");
  Model m = zero_model({j.at("topology").at("n_in").get<int>(), j.at("topology").at("n_hidden").get<int>()});
  m.columns = j.at("columns").get<std::vector<std::string>>();
  m.hidden_weights = matrix_from(j.at("hidden_weights"));
  m.hidden_bias = vec(j.at("hidden_bias"));
  m.output_weights = matrix_from(j.at("output_weights")).transpose();
  m.output_bias = j.at("output_bias").get<double>();
  m.input_scaling.center = vec(j.at("input_scaling").at("center"));
  m.input_scaling.half_range = vec(j.at("input_scaling").at("half_range"));
  m.target_center = j.at("target_scaling").at("center").get<double>();
  m.target_half_range = j.at("target_scaling").at("half_range").get<double>();
  if (m.hidden_weights.rows() != m.topology.n_hidden || m.hidden_weights.cols() != m.topology.n_in ||
      m.output_weights.size() != m.topology.n_hidden || m.hidden_bias.size() != m.topology.n_hidden)
    throw DataError("ANN artifact: weight shapes do not match topology");
  return m;
}

}  // namespace aadt::ann
