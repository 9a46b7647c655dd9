#pragma once

// Independent reference computations used to check the library. Nothing here
// calls into the code under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace aadt::oracle {

inline Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double gamma) {
  Eigen::MatrixXd K(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = std::exp(-gamma * (X.row(i) - X.row(j)).squaredNorm());
  return K;
}

struct SvrDual {
  Eigen::VectorXd alpha, alpha_star;
  double objective = 0.0;
  double bias = 0.0;
  long iterations = 0;
};

inline double svr_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double eps,
                            const Eigen::VectorXd& a, const Eigen::VectorXd& as) {
  const Eigen::VectorXd b = a - as;
  return -0.5 * b.dot(K * b) - eps * (a.sum() + as.sum()) + y.dot(b);
}

// Euclidean projection of v (stacked [alpha; alpha*]) onto
// {0 <= v <= C, sum(alpha) = sum(alpha*)} by bisection on the multiplier.
inline Eigen::VectorXd project(const Eigen::VectorXd& v, double C) {
  const Eigen::Index n = v.size() / 2;
  auto at = [&](double lambda) {
    Eigen::VectorXd p(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double s = i < n ? 1.0 : -1.0;
      p(i) = std::clamp(v(i) - lambda * s, 0.0, C);
    }
    return p;
  };
  auto balance = [&](double lambda) {
    const auto p = at(lambda);
    return p.head(n).sum() - p.tail(n).sum();  // non-increasing in lambda
  };
  double lo = -(v.cwiseAbs().maxCoeff() + C + 1.0), hi = -lo;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (balance(mid) > 0.0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

// Accelerated projected-gradient ascent on the dense epsilon-SVR dual, run
// until successive iterates differ by less than `tol`.
inline SvrDual svr_projected_gradient(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, double eps,
                                      double tol = 1e-10, long max_iter = 5'000'000) {
  const Eigen::Index n = y.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const double L = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-12);
  auto grad = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd Kb = K * (v.head(n) - v.tail(n));
    Eigen::VectorXd g(2 * n);
    g.head(n) = -Kb.array() - eps + y.array();
    g.tail(n) = Kb.array() - eps - y.array();
    return g;
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n), z = x;
  double t = 1.0;
  long it = 0;
  for (; it < max_iter; ++it) {
    const Eigen::VectorXd next = project(z + grad(z) / L, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // Restart momentum when the objective drops.
    const bool restart = svr_objective(K, y, eps, next.head(n), next.tail(n)) <
                         svr_objective(K, y, eps, x.head(n), x.tail(n));
    z = restart ? next : Eigen::VectorXd(next + ((t - 1.0) / t_next) * (next - x));
    const double step = (next - x).cwiseAbs().maxCoeff();
    x = next;
    t = restart ? 1.0 : t_next;
    if (step < tol && it > 10) break;
  }
  SvrDual d;
  d.alpha = x.head(n);
  d.alpha_star = x.tail(n);
  d.objective = svr_objective(K, y, eps, d.alpha, d.alpha_star);
  d.iterations = it;
  // Bias from free variables: f(x_i) = y_i - eps (alpha free) or y_i + eps
  // (alpha* free).
  const Eigen::VectorXd Kb = K * (d.alpha - d.alpha_star);
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.alpha(i) > 1e-8 && d.alpha(i) < C - 1e-8) sum += y(i) - eps - Kb(i), ++count;
    if (d.alpha_star(i) > 1e-8 && d.alpha_star(i) < C - 1e-8) sum += y(i) + eps - Kb(i), ++count;
  }
  d.bias = count ? sum / count : 0.0;
  return d;
}

// Largest KKT violation m(a) - M(a) of a dual point in the 2n-variable form,
// computed from scratch.
inline double svr_kkt_gap(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, double eps,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star) {
  const Eigen::Index n = y.size();
  const Eigen::VectorXd Kb = K * (alpha - alpha_star);
  double up = -INFINITY, low = INFINITY;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Minimization gradient for alpha: Kb - y + eps; sign +1.
    const double ga = Kb(i) - y(i) + eps;
    // For alpha*: -Kb + y + eps; sign -1.
    const double gs = -Kb(i) + y(i) + eps;
    if (alpha(i) < C) up = std::max(up, -ga);
    if (alpha(i) > 0) low = std::min(low, -ga);
    if (alpha_star(i) > 0) up = std::max(up, gs);
    if (alpha_star(i) < C) low = std::min(low, gs);
  }
  return std::max(0.0, up - low);
}

// Minimum-norm least squares through the Moore-Penrose pseudo-inverse built
// from an SVD (independent of the QR path in the library).
inline Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double cut = 1e-12 * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * y;
}

inline double naive_rmse(const std::vector<double>& a, const std::vector<double>& p) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (static_cast<long double>(a[i]) - p[i]) * (static_cast<long double>(a[i]) - p[i]);
  return static_cast<double>(std::sqrt(s / a.size()));
}

inline double naive_mape(const std::vector<double>& a, const std::vector<double>& p) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs((static_cast<long double>(a[i]) - p[i]) / a[i]);
  return static_cast<double>(100.0L * s / a.size());
}

// Central differences of a vector-valued function of a parameter vector.
inline Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& theta, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(theta);
  Eigen::MatrixXd J(f0.size(), theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    J.col(k) = (f(tp) - f(tm)) / (2.0 * h);
  }
  return J;
}

}  // namespace aadt::oracle
