#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aadt/features.hpp"
#include "aadt/linalg.hpp"

namespace aadt::svr {

struct Params {
  double C = 1.0;
  double gamma = 0.1;
  double epsilon = 0.01;
  double kkt_tol = 1e-3;
  long max_passes = 10'000'000;  // SMO pair updates
};

// Per-column standardization (mean, standard deviation; spread 1 for
// constant columns).
struct Scaler {
  Eigen::VectorXd center;
  Eigen::VectorXd spread;

  static Scaler fit(const Eigen::MatrixXd& X);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  RowMatrix apply(const Eigen::MatrixXd& X) const;
};

struct Model {
  std::vector<std::string> columns;
  Scaler scaler;
  RowMatrix support;      // scaled support rows
  Eigen::VectorXd beta;   // alpha - alpha* per support row
  double bias = 0.0;
  double gamma = 0.1;
  double epsilon = 0.01;
  double C = 1.0;
  double dual_objective = 0.0;  // maximized dual value at the returned solution
  double kkt_violation = 0.0;   // m(a) - M(a) at termination
  long iterations = 0;

  double predict(const Eigen::VectorXd& x) const;        // raw (unscaled) features
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

double rbf(std::span<const double> x, std::span<const double> z, double gamma);

// Full dual solution on scaled data; exposed for oracle comparisons.
struct DualSolution {
  Eigen::VectorXd alpha;       // size n
  Eigen::VectorXd alpha_star;  // size n
  double bias = 0.0;
  double objective = 0.0;      // maximized dual objective
  double max_violation = 0.0;
  long iterations = 0;
};

// Solves the epsilon-SVR dual on a precomputed kernel matrix.
DualSolution solve_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Params& p);

// Maximized dual objective W(alpha, alpha*) for a given kernel matrix.
double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double epsilon,
                      const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star);

Model train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Params& p,
            std::vector<std::string> columns = {});

// AADT = predicted AADT factor * daily total.
double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta);

struct CvGrid {
  std::vector<double> C;
  std::vector<double> gamma;
  int folds = 5;
  std::uint64_t seed = 42;

  // 2^k for k in [c_lo, c_hi] and [g_lo, g_hi] with the given exponent step.
  static CvGrid powers(int c_lo, int c_hi, int g_lo, int g_hi, int step = 1);
  static CvGrid standard() { return powers(-3, 15, -15, 3); }
};

struct CvCell {
  double C = 0.0;
  double gamma = 0.0;
  std::optional<double> rmse;  // empty when the cell failed to train
  std::string failure;
};

struct GridResult {
  double best_C = 0.0;
  double best_gamma = 0.0;
  double best_rmse = 0.0;
  std::vector<CvCell> table;  // C-major grid order
};

// Fold assignment by group label (station) when there are at least `folds`
// groups, by row otherwise. Seeded shuffle of the groups.
std::vector<int> assign_folds(std::span<const std::string> groups, int folds, std::uint64_t seed);

GridResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::span<const std::string> groups, const CvGrid& grid, const Params& p0);

namespace reference {
GridResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::span<const std::string> groups, const CvGrid& grid, const Params& p0);
}

nlohmann::json to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);

}  // namespace aadt::svr
