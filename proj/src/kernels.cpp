#include "aadt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aadt::kernels {

namespace {

std::span<const double> row(const RowMatrix& M, Eigen::Index i) {
  return {M.data() + i * M.cols(), static_cast<std::size_t>(M.cols())};
}

double rbf_entry(const RowMatrix& A, Eigen::Index i, const RowMatrix& B, Eigen::Index j,
                 double gamma) {
  return std::exp(-gamma * squared_distance(row(A, i), row(B, j)));
}

double expansion_at(const RowMatrix& support, const Eigen::VectorXd& coef, double bias,
                    double gamma, const RowMatrix& Q, Eigen::Index q) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    f += coef(i) * rbf_entry(support, i, Q, q, gamma);
  return f + bias;
}

double rss_with(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> cols,
                int candidate, bool require_full_rank) {
  cols.push_back(candidate);
  const auto fit = least_squares(select_columns(X, cols), y, true);
  if (require_full_rank && !fit.full_rank) return std::numeric_limits<double>::quiet_NaN();
  return std::isfinite(fit.rss) ? fit.rss : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double squared_distance(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    s += d * d;
  }
  return s;
}

Eigen::MatrixXd gram_matrix(const RowMatrix& X, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = rbf_entry(X, i, X, j, gamma);
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::VectorXd rbf_expansion(const RowMatrix& support, const Eigen::VectorXd& coef,
                              double bias, double gamma, const RowMatrix& Q) {
  Eigen::VectorXd out(Q.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index q = 0; q < Q.rows(); ++q)
    out(q) = expansion_at(support, coef, bias, gamma, Q, q);
  return out;
}

std::vector<double> candidate_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& selected,
                                  const std::vector<int>& candidates, bool require_full_rank) {
  std::vector<double> out(candidates.size());
  const auto m = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < m; ++c)
    out[static_cast<std::size_t>(c)] = rss_with(X, y, selected, candidates[static_cast<std::size_t>(c)], require_full_rank);
  return out;
}

namespace reference {

Eigen::MatrixXd gram_matrix(const RowMatrix& X, double gamma) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      K(i, j) = i == j ? 1.0 : rbf_entry(X, std::min(i, j), X, std::max(i, j), gamma);
  return K;
}

Eigen::VectorXd rbf_expansion(const RowMatrix& support, const Eigen::VectorXd& coef,
                              double bias, double gamma, const RowMatrix& Q) {
  Eigen::VectorXd out(Q.rows());
  for (Eigen::Index q = 0; q < Q.rows(); ++q) out(q) = expansion_at(support, coef, bias, gamma, Q, q);
  return out;
}

std::vector<double> candidate_rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& selected,
                                  const std::vector<int>& candidates, bool require_full_rank) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int c : candidates) out.push_back(rss_with(X, y, selected, c, require_full_rank));
  return out;
}

}  // namespace reference

}  // namespace aadt::kernels
