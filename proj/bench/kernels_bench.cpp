// Parallel kernels against their serial references on both row sources.
// The pair source recomputes each row from subject covariates on the fly;
// the dense source reads stored rows.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "pairsel/kernels.hpp"
#include "pairsel/kernels_serial.hpp"

using namespace pairsel;

namespace {

constexpr Index kCovariates = 10;

std::shared_ptr<RowMatrix> gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto mat = std::make_shared<RowMatrix>(rows, cols);
  for (Index i = 0; i < mat->size(); ++i) mat->data()[i] = normal(rng);
  return mat;
}

// All n(n-1)/2 pairs of n subjects with random positive scales.
PairRows pair_rows(Index n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  auto p = std::make_shared<PairRows::Pairs>();
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) {
      p->first.push_back(i);
      p->second.push_back(j);
      p->scale.push_back(unif(rng));
    }
  return PairRows(gaussian_matrix(n, kCovariates, 12), p);
}

DenseRows dense_rows(Index m) { return DenseRows(gaussian_matrix(m, kCovariates, 13)); }

std::vector<double> weights(Index m) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unif(0.0, 0.25);
  std::vector<double> w(static_cast<std::size_t>(m));
  for (auto& v : w) v = unif(rng);
  return w;
}

std::vector<Index> all_columns() {
  std::vector<Index> cols;
  for (Index j = 0; j < kCovariates; ++j) cols.push_back(j);
  return cols;
}

// range(0) is the subject count; the dense source gets the same number of rows as the pair source.
template <class Rows>
Rows make_rows(Index subjects);
template <>
PairRows make_rows<PairRows>(Index subjects) { return pair_rows(subjects); }
template <>
DenseRows make_rows<DenseRows>(Index subjects) { return dense_rows(subjects * (subjects - 1) / 2); }

template <class Rows, bool Parallel>
void BM_ColumnSums(benchmark::State& state) {
  const Rows rows = make_rows<Rows>(state.range(0));
  const auto w = weights(rows.rows());
  const auto cols = all_columns();
  std::vector<double> out(cols.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::weighted_column_sums(rows, cols, w, out);
    else
      kernels::serial::weighted_column_sums(rows, cols, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * rows.rows());
}

template <class Rows, bool Parallel>
void BM_Gram(benchmark::State& state) {
  const Rows rows = make_rows<Rows>(state.range(0));
  const auto h = weights(rows.rows());
  const auto cols = all_columns();
  Eigen::MatrixXd out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::weighted_gram(rows, cols, h, out);
    else
      kernels::serial::weighted_gram(rows, cols, h, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * rows.rows());
}

template <class Rows, bool Parallel>
void BM_LinearPredictor(benchmark::State& state) {
  const Rows rows = make_rows<Rows>(state.range(0));
  const auto cols = all_columns();
  const std::vector<double> coef(cols.size(), 0.5);
  std::vector<double> eta(static_cast<std::size_t>(rows.rows()));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::linear_predictor(rows, cols, coef, eta);
    else
      kernels::serial::linear_predictor(rows, cols, coef, eta);
    benchmark::DoNotOptimize(eta.data());
  }
  state.SetItemsProcessed(state.iterations() * rows.rows());
}

}  // namespace

BENCHMARK(BM_ColumnSums<PairRows, true>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ColumnSums<PairRows, false>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ColumnSums<DenseRows, true>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ColumnSums<DenseRows, false>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram<PairRows, true>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram<PairRows, false>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram<DenseRows, true>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram<DenseRows, false>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearPredictor<PairRows, true>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearPredictor<PairRows, false>)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
