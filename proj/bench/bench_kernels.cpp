// Parallel kernels against their serial reference twins.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "aadt/features.hpp"
#include "aadt/kernels.hpp"
#include "aadt/rng.hpp"
#include "aadt/svr.hpp"

using namespace aadt;

namespace {

RowMatrix random_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
  return X;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (auto& e : v) e = rng.normal();
  return v;
}

template <bool Parallel>
void BM_Gram(benchmark::State& state) {
  const auto X = random_rows(state.range(0), 43, 1);
  for (auto _ : state) {
    auto K = Parallel ? kernels::gram_matrix(X, 0.05) : kernels::reference::gram_matrix(X, 0.05);
    benchmark::DoNotOptimize(K.data());
  }
}

template <bool Parallel>
void BM_RbfExpansion(benchmark::State& state) {
  const auto S = random_rows(state.range(0), 43, 2);
  const auto Q = random_rows(2000, 43, 3);
  const auto coef = random_vector(state.range(0), 4);
  for (auto _ : state) {
    auto f = Parallel ? kernels::rbf_expansion(S, coef, 0.1, 0.05, Q)
                      : kernels::reference::rbf_expansion(S, coef, 0.1, 0.05, Q);
    benchmark::DoNotOptimize(f.data());
  }
}

template <bool Parallel>
void BM_CandidateRss(benchmark::State& state) {
  const Eigen::MatrixXd X = random_rows(state.range(0), 24, 5);
  const auto y = random_vector(state.range(0), 6);
  const std::vector<int> selected = {0, 3, 7, 11, 15};
  std::vector<int> candidates;
  for (int j = 0; j < 24; ++j)
    if (std::find(selected.begin(), selected.end(), j) == selected.end()) candidates.push_back(j);
  for (auto _ : state) {
    auto r = Parallel ? kernels::candidate_rss(X, y, selected, candidates)
                      : kernels::reference::candidate_rss(X, y, selected, candidates);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Parallel>
void BM_GridSearch(benchmark::State& state) {
  const Eigen::MatrixXd X = random_rows(state.range(0), 10, 7);
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = std::sin(X(i, 0)) + 0.1 * X(i, 1);
  std::vector<std::string> groups;
  for (Eigen::Index i = 0; i < X.rows(); ++i) groups.push_back("G" + std::to_string(i % 20));
  const auto grid = svr::CvGrid::powers(-3, 9, -9, 0, 3);
  for (auto _ : state) {
    auto r = Parallel ? svr::grid_search(X, y, groups, grid, {}) : svr::reference::grid_search(X, y, groups, grid, {});
    benchmark::DoNotOptimize(r.best_rmse);
  }
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Gram, true)->Name("gram/parallel")->Arg(500)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Gram, false)->Name("gram/serial")->Arg(500)->Arg(2000);
BENCHMARK_TEMPLATE(BM_RbfExpansion, true)->Name("rbf_expansion/parallel")->Arg(500)->Arg(2000);
BENCHMARK_TEMPLATE(BM_RbfExpansion, false)->Name("rbf_expansion/serial")->Arg(500)->Arg(2000);
BENCHMARK_TEMPLATE(BM_CandidateRss, true)->Name("candidate_rss/parallel")->Arg(2000)->Arg(10000);
BENCHMARK_TEMPLATE(BM_CandidateRss, false)->Name("candidate_rss/serial")->Arg(2000)->Arg(10000);
BENCHMARK_TEMPLATE(BM_GridSearch, true)->Name("grid_search/parallel")->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_GridSearch, false)->Name("grid_search/serial")->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
