#include "pairsel/cv.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "pairsel/error.hpp"

namespace pairsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!(grid[g] >= 0.0) || !std::isfinite(grid[g])) throw InvalidArgument("lambda grid entries must be finite and >= 0");
    if (g > 0 && !(grid[g] < grid[g - 1])) throw InvalidArgument("lambda grid must be strictly descending");
  }
}

/// Held-out loss of a fit, for one fold.
using Evaluate = std::function<double(const FitResult&)>;

struct FoldTask {
  GlmProblem train;
  Evaluate evaluate;
};

/// Fits the descending grid on one training problem, warm-starting each
/// point from the previous LASSO solution. A fit that fails numerically
/// leaves its cell at +inf; the path continues from the last good warm start.
void run_fold_path(const FoldTask& task, PenaltyKind kind, const std::vector<double>& grid,
                   const CvOptions& options, double* values, std::size_t& failed) {
  std::optional<WarmStart> warm;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      const FitResult lasso = fit_lasso(task.train, grid[g], options.solver, warm);
      warm = WarmStart{lasso.gamma, lasso.intercept};
      if (kind == PenaltyKind::Lasso) {
        values[g] = task.evaluate(lasso);
      } else {
        const FitResult fit = fit_lla(task.train, make_penalty(kind, grid[g], options.a), options.solver, warm);
        values[g] = task.evaluate(fit);
      }
    } catch (const NumericalError&) {
      values[g] = kInf;
      ++failed;
    }
  }
}

CvResult run_cv(Index n, PenaltyKind kind, const std::vector<double>& grid, const CvOptions& options,
                const std::function<FoldTask(const std::vector<Index>&, const std::vector<Index>&, int)>& make_task) {
  check_grid(grid);
  options.solver.validate();
  CvResult result;
  result.lambdas = grid;
  result.fold_assignment = kfold_split(n, options.folds, options.seed);
  const int k = options.folds;
  const auto ng = static_cast<Index>(grid.size());

  // Fold construction validates every fold up front, in fold order.
  std::vector<FoldTask> tasks;
  tasks.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f)
    tasks.push_back(make_task(fold_members(result.fold_assignment, f, false),
                              fold_members(result.fold_assignment, f, true), f));

  Eigen::MatrixXd values(k, ng);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(k), std::vector<double>(grid.size()));
  std::vector<std::size_t> failed(static_cast<std::size_t>(k), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
#pragma omp parallel for schedule(dynamic) if (k > 1)
  for (int f = 0; f < k; ++f) {
    try {
      run_fold_path(tasks[static_cast<std::size_t>(f)], kind, grid, options,
                    rows[static_cast<std::size_t>(f)].data(), failed[static_cast<std::size_t>(f)]);
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int f = 0; f < k; ++f)
    for (Index g = 0; g < ng; ++g) values(f, g) = rows[static_cast<std::size_t>(f)][static_cast<std::size_t>(g)];
  result.per_fold_values = values;
  result.failed_fits = std::accumulate(failed.begin(), failed.end(), std::size_t{0});

  result.cv_values.resize(grid.size());
  for (Index g = 0; g < ng; ++g) {
    double s = 0.0;
    for (int f = 0; f < k; ++f) s += values(f, g);
    result.cv_values[static_cast<std::size_t>(g)] = s;
  }
  // grid is descending, so the first minimizer is the largest lambda
  const auto best = std::min_element(result.cv_values.begin(), result.cv_values.end());
  if (!std::isfinite(*best))
    throw NumericalError("every cross-validation fit failed; no lambda can be selected");
  result.chosen_index = static_cast<std::size_t>(best - result.cv_values.begin());
  result.chosen_lambda = grid[result.chosen_index];
  return result;
}

}  // namespace

PenaltySpec make_penalty(PenaltyKind kind, double lambda, double a) {
  PenaltySpec spec{kind, lambda, a > 0.0 ? a : default_concavity(kind)};
  spec.validate();
  return spec;
}

std::vector<int> kfold_split(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("number of folds must be at least 2");
  if (folds > n)
    throw InvalidArgument("number of folds (" + std::to_string(folds) + ") exceeds the number of subjects (" +
                          std::to_string(n) + ")");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    assignment[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return assignment;
}

std::vector<Index> fold_members(const std::vector<int>& assignment, int fold, bool held_out) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if ((assignment[i] == fold) == held_out) out.push_back(static_cast<Index>(i));
  return out;
}

CvResult cross_validate(const CompleteCases& cases, PenaltyKind kind, const std::vector<double>& grid,
                        const CvOptions& options) {
  auto make_task = [&](const std::vector<Index>& train_idx, const std::vector<Index>& test_idx, int f) {
    const std::string name = "fold " + std::to_string(f + 1);
    if (test_idx.size() < 2)
      throw DataError(name + " has fewer than 2 held-out subjects; the pairwise loss is undefined");
    if (train_idx.size() < 2) throw DataError(name + " leaves fewer than 2 training subjects");
    auto test = std::make_shared<PairwiseDesign>(build_pairwise(subset_cases(cases, test_idx), options.pairwise));
    if (test->m() == 0) throw DataError(name + " has no held-out pairs with distinct responses");
    PairwiseDesign train = build_pairwise(subset_cases(cases, train_idx), options.pairwise);
    if (train.m() == 0) throw DataError(name + " has no training pairs with distinct responses");
    return FoldTask{train.problem(), [test](const FitResult& fit) { return pairwise_loss(*test, fit.gamma); }};
  };
  return run_cv(cases.n(), kind, grid, options, make_task);
}

CvResult cross_validate_glm(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& x, PenaltyKind kind,
                            const std::vector<double>& grid, const CvOptions& options) {
  if (y.size() != x.rows()) throw InvalidArgument("response and covariates have different row counts");
  auto take = [&](const std::vector<Index>& idx, Eigen::VectorXd& ys, Eigen::MatrixXd& xs) {
    ys.resize(static_cast<Index>(idx.size()));
    xs.resize(static_cast<Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ys[static_cast<Index>(i)] = y[idx[i]];
      xs.row(static_cast<Index>(i)) = x.row(idx[i]);
    }
  };
  auto make_task = [&](const std::vector<Index>& train_idx, const std::vector<Index>& test_idx, int f) {
    const std::string name = "fold " + std::to_string(f + 1);
    if (test_idx.empty()) throw DataError(name + " has no held-out subjects");
    Eigen::VectorXd ytr, yte;
    Eigen::MatrixXd xtr, xte;
    take(train_idx, ytr, xtr);
    take(test_idx, yte, xte);
    auto test = std::make_shared<GlmProblem>(make_glm_problem(family, yte, xte));
    GlmProblem train = make_glm_problem(family, ytr, xtr);
    null_intercept(train);  // rejects single-class logistic training folds
    return FoldTask{std::move(train), [test](const FitResult& fit) {
                      return problem_loss(*test, fit.gamma, fit.intercept);
                    }};
  };
  return run_cv(y.size(), kind, grid, options, make_task);
}

}  // namespace pairsel
