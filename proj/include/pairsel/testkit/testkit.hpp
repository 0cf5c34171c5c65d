#pragma once

// Reference implementations used to check the production code. Everything
// here is computed from the raw complete cases by a direct double loop over
// subject pairs, without the pair design, the kernels or the solver.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pairsel/pairwise.hpp"
#include "pairsel/penalty.hpp"

namespace pairsel::testkit {

/// 2/(n(n-1)) sum_{i<j} log(1 + exp(-(y_i - y_j)(x_i - x_j)'gamma)).
double direct_loss(const CompleteCases& cases, const Eigen::VectorXd& gamma);
Eigen::VectorXd direct_gradient(const CompleteCases& cases, const Eigen::VectorXd& gamma);
Eigen::MatrixXd direct_hessian(const CompleteCases& cases, const Eigen::VectorXd& gamma);

/// Central differences of `f`, coordinatewise.
Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& gamma, double h);

/// Central differences of the pairwise loss.
Eigen::VectorXd finite_diff_grad(const CompleteCases& cases, const Eigen::VectorXd& gamma, double h);

/// Central differences of a gradient map; column j is (g(x + h e_j) - g(x - h e_j)) / 2h.
Eigen::MatrixXd finite_diff_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                     const Eigen::VectorXd& gamma, double h);

struct OracleFit {
  std::vector<Index> support;
  Eigen::VectorXd gamma_restricted;  // zero off the support
  double loss_value = 0.0;
  double objective = 0.0;            // loss + penalty, filled by exhaustive_best_subset
};

/// Minimizer of the pairwise loss over vectors supported on `support`, by
/// Newton's method with step halving, to a gradient norm of 1e-10.
/// Throws NumericalError on a singular restricted Hessian or non-convergence.
OracleFit oracle_fit(const CompleteCases& cases, const std::vector<Index>& support);

inline constexpr Index kMaxEnumerationDim = 15;

/// Global minimizer of loss + penalty among oracle fits on every support of
/// size <= max_size. Supports whose oracle fit fails are skipped. Ties go to
/// the lexicographically smallest support. Requires p <= 15.
OracleFit exhaustive_best_subset(const CompleteCases& cases, const PenaltySpec& penalty, Index max_size);

}  // namespace pairsel::testkit
