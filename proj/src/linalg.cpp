#include "aadt/linalg.hpp"

#include <algorithm>

namespace aadt {

LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              bool with_intercept) {
  const Eigen::Index n = X.rows();
  const Eigen::Index off = with_intercept ? 1 : 0;
  Eigen::MatrixXd A(n, X.cols() + off);
  if (with_intercept) A.col(0).setOnes();
  A.rightCols(X.cols()) = X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTolerance);

  LeastSquaresFit fit;
  fit.rank = qr.rank();
  fit.full_rank = fit.rank == A.cols() && n >= A.cols();
  if (!fit.full_rank) {
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = fit.rank; k < A.cols(); ++k)
      if (perm(k) >= off) fit.dependent_columns.push_back(perm(k) - off);
    std::sort(fit.dependent_columns.begin(), fit.dependent_columns.end());
  }
  const Eigen::VectorXd beta = qr.solve(y);
  fit.intercept = with_intercept ? beta(0) : 0.0;
  fit.coef = beta.tail(X.cols());
  fit.rss = (y - A * beta).squaredNorm();
  return fit;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, const std::vector<int>& columns) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(columns[j]);
  return out;
}

}  // namespace aadt
