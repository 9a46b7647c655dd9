#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aadt/corpus.hpp"

namespace aadt::ann {

struct Topology {
  int n_in = 1;
  int n_hidden = 4;
  // n_out is fixed at 1
};

// Affine map of each column onto [-1, 1] (half range 1 for constant columns).
struct RangeScaler {
  Eigen::VectorXd center;
  Eigen::VectorXd half_range;

  static RangeScaler identity(Eigen::Index n);
  static RangeScaler fit(const Eigen::MatrixXd& X);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
};

// Three-layer network: tanh hidden layer, linear output.
struct Model {
  Topology topology;
  Eigen::MatrixXd hidden_weights;  // n_hidden x n_in
  Eigen::VectorXd hidden_bias;     // n_hidden
  Eigen::VectorXd output_weights;  // n_hidden
  double output_bias = 0.0;
  RangeScaler input_scaling;
  double target_center = 0.0;
  double target_half_range = 1.0;
  std::vector<std::string> columns;

  Eigen::Index parameter_count() const;
  // Layout: hidden weights row-major, hidden biases, output weights, output bias.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);

  Eigen::VectorXd hidden(const Eigen::VectorXd& xs) const;  // tanh activations
  double forward_scaled(const Eigen::VectorXd& xs) const;   // before target unscaling
  Eigen::VectorXd forward_scaled(const Eigen::MatrixXd& Xs) const;
  double forward(const Eigen::VectorXd& x) const;           // raw in, raw out
  Eigen::VectorXd forward(const Eigen::MatrixXd& X) const;
};

// Uniform [-0.5, 0.5] weights and biases; identity scalers.
Model init(const Topology& topology, std::uint64_t seed);
Model zero_model(const Topology& topology);

// d(output - target)/d(theta) per row of scaled inputs Xs
// (rows x parameter_count).
Eigen::MatrixXd jacobian(const Model& model, const Eigen::MatrixXd& Xs);

struct LmConfig {
  double mu0 = 1e-3;
  double mu_increase = 10.0;
  double mu_decrease = 0.1;
  double mu_max = 1e10;
  int max_epochs = 200;
  double sse_goal = 0.0;
  int patience = 6;
  std::uint64_t seed = 42;

  void validate() const;
};

struct LmAttempt {
  int epoch = 0;
  double mu = 0.0;
  double sse = 0.0;  // trial SSE (scaled units)
  bool accepted = false;
};

struct TrainLog {
  std::vector<LmAttempt> attempts;
  std::vector<double> epoch_sse;   // accepted SSE at the end of each epoch
  std::vector<double> epoch_mu;
  std::vector<double> validation_rmse;
  std::string stop_reason;
};

struct TrainResult {
  Model model;
  TrainLog log;
};

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Fits input and target scalers on `train`, then runs Levenberg-Marquardt
// from the weights in `start`. With a validation set, stops after
// `patience` epochs without improvement and returns the best-validation
// weights.
TrainResult train_lm(const Model& start, const Dataset& train, const LmConfig& cfg,
                     const std::optional<Dataset>& validation = std::nullopt);

struct HiddenCandidate {
  int n_hidden = 0;
  std::optional<double> validation_rmse;  // raw target units
  double train_sse = 0.0;
  int epochs = 0;
  std::string failure;
};

struct HiddenSearch {
  int best_hidden = 0;
  std::vector<HiddenCandidate> table;
  TrainResult best;
};

HiddenSearch pick_hidden(const std::vector<int>& candidates, const Dataset& train,
                         const Dataset& validation, const LmConfig& cfg,
                         std::vector<std::string> columns = {});

double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta);

nlohmann::json to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);

}  // namespace aadt::ann
