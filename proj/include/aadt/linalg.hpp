#pragma once

#include <Eigen/Dense>
#include <vector>

namespace aadt {

// Least-squares fit via column-pivoted Householder QR.
struct LeastSquaresFit {
  double intercept = 0.0;        // 0 when fitted without intercept
  Eigen::VectorXd coef;          // one per column of X
  double rss = 0.0;
  Eigen::Index rank = 0;         // rank of the (augmented) design
  bool full_rank = false;
  std::vector<Eigen::Index> dependent_columns;  // X columns outside the pivoted rank
};

// Relative pivot threshold below which a column counts as dependent.
inline constexpr double kRankTolerance = 1e-10;

LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              bool with_intercept = true);

// Column gather helper.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& columns);

}  // namespace aadt

namespace aadt {
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}  // namespace aadt
