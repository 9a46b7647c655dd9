#include "aadt/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "aadt/error.hpp"
#include "aadt/kernels.hpp"
#include "aadt/rng.hpp"

namespace aadt::svr {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// State of the LIBSVM-style formulation with 2n variables a = [alpha; alpha*],
// signs s = [+1; -1] and linear term p = [eps - y; eps + y].
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Params& p)
      : K_(K), n_(y.size()), C_(p.C), a_(Eigen::VectorXd::Zero(2 * n_)), G_(2 * n_) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      G_(i) = p.epsilon - y(i);
      G_(i + n_) = p.epsilon + y(i);
    }
  }

  // Returns the number of pair updates performed.
  long run(double tol, long max_iter) {
    long iter = 0;
    for (;;) {
      Eigen::Index i = -1, j = -1;
      const double gap = select(i, j);
      if (gap < tol || j < 0) return iter;
      if (iter >= max_iter)
        throw NumericalError("SMO did not converge within " + std::to_string(max_iter) +
                             " iterations; largest KKT violation " + std::to_string(gap));
      update(i, j);
      ++iter;
    }
  }

  double violation() {
    Eigen::Index i, j;
    return std::max(0.0, select(i, j));
  }

  double rho() const {
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    long nr_free = 0;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      const double yG = sign(t) * G_(t);
      if (upper(t)) {
        if (sign(t) < 0) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else if (lower(t)) {
        if (sign(t) > 0) ub = std::min(ub, yG);
        else lb = std::max(lb, yG);
      } else {
        ++nr_free;
        sum_free += yG;
      }
    }
    return nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
  }

  Eigen::VectorXd alpha() const { return a_.head(n_); }
  Eigen::VectorXd alpha_star() const { return a_.tail(n_); }

 private:
  double sign(Eigen::Index t) const { return t < n_ ? 1.0 : -1.0; }
  Eigen::Index idx(Eigen::Index t) const { return t < n_ ? t : t - n_; }
  bool upper(Eigen::Index t) const { return a_(t) >= C_; }
  bool lower(Eigen::Index t) const { return a_(t) <= 0.0; }
  double Q(Eigen::Index t, Eigen::Index u) const { return sign(t) * sign(u) * K_(idx(t), idx(u)); }

  // Maximal violating i, second-order j; returns m(a) - M(a).
  double select(Eigen::Index& out_i, Eigen::Index& out_j) const {
    double gmax = -kInf, gmax2 = -kInf;
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      if (sign(t) > 0) {
        if (!upper(t) && -G_(t) >= gmax) gmax = -G_(t), i = t;
      } else {
        if (!lower(t) && G_(t) >= gmax) gmax = G_(t), i = t;
      }
    }
    Eigen::Index j = -1;
    double obj_min = kInf;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      if (sign(t) > 0) {
        if (lower(t)) continue;
        gmax2 = std::max(gmax2, G_(t));
        const double diff = gmax + G_(t);
        if (i >= 0 && diff > 0.0) {
          double quad = K_(idx(i), idx(i)) + K_(idx(t), idx(t)) - 2.0 * sign(i) * Q(i, t);
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) j = t, obj_min = obj;
        }
      } else {
        if (upper(t)) continue;
        gmax2 = std::max(gmax2, -G_(t));
        const double diff = gmax - G_(t);
        if (i >= 0 && diff > 0.0) {
          double quad = K_(idx(i), idx(i)) + K_(idx(t), idx(t)) + 2.0 * sign(i) * Q(i, t);
          const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_min) j = t, obj_min = obj;
        }
      }
    }
    out_i = i;
    out_j = j;
    return gmax + gmax2;
  }

  void update(Eigen::Index i, Eigen::Index j) {
    const double Qij = Q(i, j);
    const double Qii = K_(idx(i), idx(i)), Qjj = K_(idx(j), idx(j));
    const double old_ai = a_(i), old_aj = a_(j);
    double& ai = a_(i);
    double& aj = a_(j);
    if (sign(i) != sign(j)) {
      double quad = Qii + Qjj + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G_(i) - G_(j)) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) aj = 0.0, ai = diff;
      } else {
        if (ai < 0.0) ai = 0.0, aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > C_) ai = C_, aj = C_ - diff;
      } else {
        if (aj > C_) aj = C_, ai = C_ + diff;
      }
    } else {
      double quad = Qii + Qjj - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G_(i) - G_(j)) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C_) {
        if (ai > C_) ai = C_, aj = sum - C_;
      } else {
        if (aj < 0.0) aj = 0.0, ai = sum;
      }
      if (sum > C_) {
        if (aj > C_) aj = C_, ai = sum - C_;
      } else {
        if (ai < 0.0) ai = 0.0, aj = sum;
      }
    }
    const double di = (ai - old_ai) * sign(i), dj = (aj - old_aj) * sign(j);
    const auto ki = K_.col(idx(i)), kj = K_.col(idx(j));
    // G_t += s_t * (s_i da_i K(i,t) + s_j da_j K(j,t))
#pragma omp parallel for schedule(static) if (n_ > 8192)
    for (Eigen::Index k = 0; k < n_; ++k) {
      const double u = di * ki(k) + dj * kj(k);
      G_(k) += u;
      G_(k + n_) -= u;
    }
  }

  const Eigen::MatrixXd& K_;
  Eigen::Index n_;
  double C_;
  Eigen::VectorXd a_;
  Eigen::VectorXd G_;
};

}  // namespace

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
  Scaler s;
  const auto n = static_cast<double>(X.rows());
  s.center = X.colwise().mean().transpose();
  s.spread.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - s.center(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.spread(j) = sd > 1e-12 * std::max(1.0, std::abs(s.center(j))) ? sd : 1.0;
  }
  return s;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& x) const {
  return ((x - center).array() / spread.array()).matrix();
}

RowMatrix Scaler::apply(const Eigen::MatrixXd& X) const {
  RowMatrix out(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    out.row(r) = ((X.row(r).transpose() - center).array() / spread.array()).matrix().transpose();
  return out;
}

double rbf(std::span<const double> x, std::span<const double> z, double gamma) {
  if (x.size() != z.size()) throw UsageError("rbf: dimension mismatch");
  return std::exp(-gamma * kernels::squared_distance(x, z));
}

double dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double epsilon,
                      const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star) {
  const Eigen::VectorXd beta = alpha - alpha_star;
  return -0.5 * beta.dot(K * beta) - epsilon * (alpha + alpha_star).sum() + y.dot(beta);
}

DualSolution solve_dual(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, const Params& p) {
  if (!(p.C > 0.0) || !(p.gamma > 0.0) || !(p.epsilon >= 0.0) || !(p.kkt_tol > 0.0))
    throw UsageError("SVR parameters must satisfy C > 0, gamma > 0, epsilon >= 0, kkt_tol > 0");
  SmoSolver solver(K, y, p);
  DualSolution sol;
  sol.iterations = solver.run(p.kkt_tol, p.max_passes);
  sol.alpha = solver.alpha();
  sol.alpha_star = solver.alpha_star();
  sol.bias = -solver.rho();
  sol.max_violation = solver.violation();
  sol.objective = dual_objective(K, y, p.epsilon, sol.alpha, sol.alpha_star);
  return sol;
}

double Model::predict(const Eigen::VectorXd& x) const {
  if (x.size() != scaler.center.size())
    throw UsageError("SVR predict: expected " + std::to_string(scaler.center.size()) +
                     " features, got " + std::to_string(x.size()));
  const Eigen::VectorXd xs = scaler.apply(x);
  double f = 0.0;
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    const double d = kernels::squared_distance(
        {support.data() + i * support.cols(), static_cast<std::size_t>(support.cols())},
        {xs.data(), static_cast<std::size_t>(xs.size())});
    f += beta(i) * std::exp(-gamma * d);
  }
  return f + bias;
}

Eigen::VectorXd Model::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != scaler.center.size())
    throw UsageError("SVR predict: feature count mismatch");
  const RowMatrix Q = scaler.apply(X);
  // Same summation order as the single-row path.
  Eigen::VectorXd out = kernels::rbf_expansion(support, beta, 0.0, gamma, Q);
  return out.array() + bias;
}

Model train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Params& p,
            std::vector<std::string> columns) {
  if (X.rows() < 2) throw DataError("SVR training needs at least 2 rows");
  if (X.rows() != y.size()) throw UsageError("SVR training: X/y row mismatch");
  Model m;
  m.columns = std::move(columns);
  m.scaler = Scaler::fit(X);
  const RowMatrix Xs = m.scaler.apply(X);
  const Eigen::MatrixXd K = kernels::gram_matrix(Xs, p.gamma);
  const auto sol = solve_dual(K, y, p);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (sol.alpha(i) - sol.alpha_star(i) != 0.0) sv.push_back(i);
  m.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
  m.beta.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support.row(static_cast<Eigen::Index>(k)) = Xs.row(sv[k]);
    m.beta(static_cast<Eigen::Index>(k)) = sol.alpha(sv[k]) - sol.alpha_star(sv[k]);
  }
  m.bias = sol.bias;
  m.gamma = p.gamma;
  m.epsilon = p.epsilon;
  m.C = p.C;
  m.dual_objective = sol.objective;
  m.kkt_violation = sol.max_violation;
  m.iterations = sol.iterations;
  return m;
}

double predict_aadt(const Model& model, const DayCount& day, const StationMeta* meta) {
  const auto x = feature_row(day, meta, model.columns);
  return model.predict(x) * daily_total(day);
}

CvGrid CvGrid::powers(int c_lo, int c_hi, int g_lo, int g_hi, int step) {
  if (step < 1) throw UsageError("grid exponent step must be >= 1");
  CvGrid g;
  for (int k = c_lo; k <= c_hi; k += step) g.C.push_back(std::ldexp(1.0, k));
  for (int k = g_lo; k <= g_hi; k += step) g.gamma.push_back(std::ldexp(1.0, k));
  return g;
}

std::vector<int> assign_folds(std::span<const std::string> groups, int folds, std::uint64_t seed) {
  if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > groups.size())
    throw DataError("cross-validation needs at least as many rows as folds");
  std::vector<std::string> uniq(groups.begin(), groups.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  auto rng = Rng::substream(seed, "folds");
  std::vector<int> fold(groups.size());
  if (uniq.size() >= static_cast<std::size_t>(folds)) {
    rng.shuffle(uniq);
    std::map<std::string, int> of;
    for (std::size_t k = 0; k < uniq.size(); ++k) of[uniq[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    for (std::size_t r = 0; r < groups.size(); ++r) fold[r] = of[groups[r]];
  } else {
    std::vector<std::size_t> order(groups.size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
    rng.shuffle(order);
    for (std::size_t k = 0; k < order.size(); ++k) fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold;
}

namespace {

CvCell evaluate_cell(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const std::vector<int>& fold, int folds, Params p) {
  CvCell cell{p.C, p.gamma, std::nullopt, {}};
  double sum_rmse = 0.0;
  try {
    for (int f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> tr, va;
      for (Eigen::Index r = 0; r < X.rows(); ++r) (fold[static_cast<std::size_t>(r)] == f ? va : tr).push_back(r);
      if (va.empty() || tr.size() < 2) throw DataError("empty fold");
      Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(tr.size()), X.cols()), Xva(static_cast<Eigen::Index>(va.size()), X.cols());
      Eigen::VectorXd ytr(Xtr.rows()), yva(Xva.rows());
      for (std::size_t k = 0; k < tr.size(); ++k) Xtr.row(static_cast<Eigen::Index>(k)) = X.row(tr[k]), ytr(static_cast<Eigen::Index>(k)) = y(tr[k]);
      for (std::size_t k = 0; k < va.size(); ++k) Xva.row(static_cast<Eigen::Index>(k)) = X.row(va[k]), yva(static_cast<Eigen::Index>(k)) = y(va[k]);
      const auto model = train(Xtr, ytr, p);
      const Eigen::VectorXd pred = model.predict(Xva);
      sum_rmse += std::sqrt((pred - yva).squaredNorm() / static_cast<double>(yva.size()));
    }
    cell.rmse = sum_rmse / folds;
  } catch (const Error& e) {
    cell.failure = e.what();
  }
  return cell;
}

template <typename CellLoop>
GridResult run_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    std::span<const std::string> groups, const CvGrid& grid, const Params& p0,
                    CellLoop loop) {
  if (grid.C.empty() || grid.gamma.empty()) throw UsageError("CV grid must be nonempty");
  if (groups.size() != static_cast<std::size_t>(X.rows()))
    throw UsageError("grid_search: one group label per row required");
  const auto fold = assign_folds(groups, grid.folds, grid.seed);
  GridResult result;
  for (double c : grid.C)
    for (double g : grid.gamma) result.table.push_back({c, g, std::nullopt, {}});
  loop(result.table, [&](CvCell& cell) {
    Params p = p0;
    p.C = cell.C;
    p.gamma = cell.gamma;
    cell = evaluate_cell(X, y, fold, grid.folds, p);
  });
  const CvCell* best = nullptr;
  for (const auto& cell : result.table) {
    if (!cell.rmse) continue;
    if (!best || *cell.rmse < *best->rmse ||
        (*cell.rmse == *best->rmse &&
         (cell.C < best->C || (cell.C == best->C && cell.gamma < best->gamma))))
      best = &cell;
  }
  if (!best) throw NumericalError("grid search: every cell failed to train");
  result.best_C = best->C;
  result.best_gamma = best->gamma;
  result.best_rmse = *best->rmse;
  return result;
}

}  // namespace

GridResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::span<const std::string> groups, const CvGrid& grid, const Params& p0) {
  return run_grid(X, y, groups, grid, p0, [](std::vector<CvCell>& cells, const auto& fn) {
    const auto m = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < m; ++c) fn(cells[static_cast<std::size_t>(c)]);
  });
}

GridResult reference::grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::span<const std::string> groups, const CvGrid& grid,
                                  const Params& p0) {
  return run_grid(X, y, groups, grid, p0, [](std::vector<CvCell>& cells, const auto& fn) {
    for (auto& cell : cells) fn(cell);
  });
}

nlohmann::json to_json(const Model& m) {
  nlohmann::json j;
  j["kind"] = "svr";
  j["version"] = 1;
  j["columns"] = m.columns;
  j["scaling"] = {{"center", std::vector<double>(m.scaler.center.begin(), m.scaler.center.end())},
                  {"spread", std::vector<double>(m.scaler.spread.begin(), m.scaler.spread.end())}};
  j["gamma"] = m.gamma;
  j["epsilon"] = m.epsilon;
  j["C"] = m.C;
  j["b"] = m.bias;
  j["dual_objective"] = m.dual_objective;
  j["kkt_violation"] = m.kkt_violation;
  j["iterations"] = m.iterations;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.support.rows(); ++i) {
    std::vector<double> r(m.support.row(i).begin(), m.support.row(i).end());
    rows.push_back(r);
  }
  j["support"] = rows;
  j["beta"] = std::vector<double>(m.beta.begin(), m.beta.end());
  return j;
}

namespace {
Eigen::VectorXd to_vector(const nlohmann::json& a) {
  const auto v = a.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}
}  // namespace

Model model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "svr") throw DataError("model artifact is not an SVR model");
  Model m;
  m.columns = j.at("columns").get<std::vector<std::string>>();
  m.scaler.center = to_vector(j.at("scaling").at("center"));
  m.scaler.spread = to_vector(j.at("scaling").at("spread"));
  m.gamma = j.at("gamma").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  m.C = j.at("C").get<double>();
  m.bias = j.at("b").get<double>();
  m.dual_objective = j.value("dual_objective", 0.0);
  m.kkt_violation = j.value("kkt_violation", 0.0);
  m.iterations = j.value("iterations", 0L);
  m.beta = to_vector(j.at("beta"));
  const auto& rows = j.at("support");
  m.support.resize(static_cast<Eigen::Index>(rows.size()), m.scaler.center.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != m.support.cols())
      throw DataError("SVR artifact: support row width mismatch");
    for (std::size_t k = 0; k < r.size(); ++k) m.support(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
  }
  if (m.beta.size() != m.support.rows()) throw DataError("SVR artifact: beta/support size mismatch");
  return m;
}

}  // namespace aadt::svr
