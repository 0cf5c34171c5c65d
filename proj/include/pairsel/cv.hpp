#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pairsel/family.hpp"
#include "pairsel/pairwise.hpp"
#include "pairsel/penalty.hpp"
#include "pairsel/solver.hpp"

namespace pairsel {

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  double a = 0.0;  // concavity; 0 selects the default for the penalty kind
  SolverConfig solver;
  PairwiseOptions pairwise;
};

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> cv_values;     // sum over folds of the held-out loss
  double chosen_lambda = 0.0;
  std::size_t chosen_index = 0;
  std::vector<int> fold_assignment;  // fold of each subject, 0-based
  Eigen::MatrixXd per_fold_values;   // folds x grid
  std::size_t failed_fits = 0;       // (fold, lambda) cells left at +inf by a failed training fit
};

/// Balanced random assignment of n subjects to K folds (sizes differ by at most 1).
std::vector<int> kfold_split(Index n, int folds, std::uint64_t seed);

/// Subjects whose assignment equals (held_out) or differs from (!held_out) `fold`.
std::vector<Index> fold_members(const std::vector<int>& assignment, int fold, bool held_out);

/// Cross-validation of the penalized pairwise fit. Subjects are split into
/// folds; training and held-out pairs are formed within each subset, so no
/// pair straddles folds. The grid must be descending; fits along it are
/// warm-started. A training fit that fails numerically leaves its cell at
/// +inf, which removes that lambda from contention. Ties pick the largest lambda.
CvResult cross_validate(const CompleteCases& cases, PenaltyKind kind, const std::vector<double>& grid,
                        const CvOptions& options = {});

/// The same protocol for a penalized GLM with intercept; the held-out
/// criterion is the averaged GLM loss of the held-out subjects.
CvResult cross_validate_glm(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                            PenaltyKind kind, const std::vector<double>& grid,
                            const CvOptions& options = {});

/// Penalty at `lambda` with the concavity from `a` (0 selects the default).
PenaltySpec make_penalty(PenaltyKind kind, double lambda, double a = 0.0);

}  // namespace pairsel
