#pragma once

// Data-parallel inner loops (OpenMP). Each kernel has a serial twin in
// aadt::kernels::reference with identical per-element arithmetic, so the
// two agree bit for bit; tests and the benchmark compare them.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "aadt/linalg.hpp"

namespace aadt::kernels {

double squared_distance(std::span<const double> x, std::span<const double> z);

// K(i,j) = exp(-gamma * |x_i - x_j|^2) over the rows of X.
Eigen::MatrixXd gram_matrix(const RowMatrix& X, double gamma);

// f(q) = sum_i coef_i * K(s_i, q) + bias for every row q of Q.
Eigen::VectorXd rbf_expansion(const RowMatrix& support, const Eigen::VectorXd& coef,
                              double bias, double gamma, const RowMatrix& Q);

// Residual sum of squares of the intercept OLS fit of y on
// [selected..., candidate] for each candidate column. A dependent candidate
// scores the RSS of the current set, or NaN with `require_full_rank`.
std::vector<double> candidate_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& selected,
                                  const std::vector<int>& candidates,
                                  bool require_full_rank = false);

namespace reference {
Eigen::MatrixXd gram_matrix(const RowMatrix& X, double gamma);
Eigen::VectorXd rbf_expansion(const RowMatrix& support, const Eigen::VectorXd& coef,
                              double bias, double gamma, const RowMatrix& Q);
std::vector<double> candidate_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& selected,
                                  const std::vector<int>& candidates,
                                  bool require_full_rank = false);
}  // namespace reference

}  // namespace aadt::kernels
