#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pairsel/glm_problem.hpp"
#include "pairsel/pairwise.hpp"
#include "pairsel/penalty.hpp"

namespace pairsel {

struct SolverConfig {
  double cd_tol = 1e-8;        // max coordinate change that ends a coordinate-descent solve
  int cd_max_sweeps = 10000;   // total CD sweep budget per weighted-L1 fit
  double lla_tol = 1e-6;       // sup-norm change between LLA iterates
  int lla_max_iter = 1000;     // contraction can be slow while a coefficient sits in (lambda, a*lambda)
  double kkt_tol = 1e-6;
  int newton_max_iter = 200;   // proximal Newton steps per weighted-L1 fit

  void validate() const;
};

struct WarmStart {
  Eigen::VectorXd gamma;
  double intercept = 0.0;
};

struct FitResult {
  Eigen::VectorXd gamma;
  double intercept = 0.0;  // always 0 for the pairwise problem
  std::vector<Index> support;
  double loss = 0.0;
  double objective = 0.0;  // loss + penalty (weighted L1 for fit_weighted_l1)
  double kkt_residual = 0.0;
  int lla_iterations = 0;
  std::vector<double> objective_trace;         // LLA: entry 0 is the initial point
  std::vector<Eigen::VectorXd> weight_trace;   // LLA: weights used by each iteration
  std::vector<Eigen::VectorXd> iterate_trace;  // LLA: gamma after each iteration
  std::vector<double> newton_trace;            // objective after each accepted Newton step
  int newton_iterations = 0;
  int cd_sweeps = 0;
};

// --- weighted-L1 inner solver ---------------------------------------------

/// argmin L(gamma) + sum_j w_j |gamma_j| (intercept unpenalized when the problem has one).
FitResult fit_weighted_l1(const GlmProblem& problem, const Eigen::VectorXd& weights,
                          const SolverConfig& config = {},
                          const std::optional<WarmStart>& init = std::nullopt);

FitResult fit_lasso(const GlmProblem& problem, double lambda, const SolverConfig& config = {},
                    const std::optional<WarmStart>& init = std::nullopt);

/// Local linear approximation for SCAD/MCP. Without `init` the LASSO fit at the
/// same lambda is the starting point.
FitResult fit_lla(const GlmProblem& problem, const PenaltySpec& penalty,
                  const SolverConfig& config = {},
                  const std::optional<WarmStart>& init = std::nullopt);

/// Dispatches to fit_lasso or fit_lla by penalty kind.
FitResult fit_penalized(const GlmProblem& problem, const PenaltySpec& penalty,
                        const SolverConfig& config = {},
                        const std::optional<WarmStart>& init = std::nullopt);

inline FitResult fit_weighted_l1(const PairwiseDesign& design, const Eigen::VectorXd& weights,
                                 const SolverConfig& config = {},
                                 const std::optional<WarmStart>& init = std::nullopt) {
  return fit_weighted_l1(design.problem(), weights, config, init);
}
inline FitResult fit_lasso(const PairwiseDesign& design, double lambda,
                           const SolverConfig& config = {},
                           const std::optional<WarmStart>& init = std::nullopt) {
  return fit_lasso(design.problem(), lambda, config, init);
}
inline FitResult fit_lla(const PairwiseDesign& design, const PenaltySpec& penalty,
                         const SolverConfig& config = {},
                         const std::optional<WarmStart>& init = std::nullopt) {
  return fit_lla(design.problem(), penalty, config, init);
}

// --- diagnostics and grids --------------------------------------------------

/// Maximal violation of the weighted-L1 KKT conditions, evaluated from scratch.
double kkt_residual(const GlmProblem& problem, const Eigen::VectorXd& gamma, double intercept,
                    const Eigen::VectorXd& weights);

/// loss + sum_j p_lambda(|gamma_j|).
double penalized_objective(const GlmProblem& problem, const Eigen::VectorXd& gamma,
                           double intercept, const PenaltySpec& penalty);

/// Intercept of the slopes-zero model (0 when the problem has no intercept).
double null_intercept(const GlmProblem& problem);

/// ||grad L||_inf at the slopes-zero model: the smallest lambda with an all-zero LASSO fit.
double lambda_max(const GlmProblem& problem);

/// Descending log-spaced grid from lambda_max(problem) to ratio * lambda_max.
std::vector<double> lambda_path(const GlmProblem& problem, int n_lambda, double ratio);
inline std::vector<double> lambda_path(const PairwiseDesign& design, int n_lambda, double ratio) {
  return lambda_path(design.problem(), n_lambda, ratio);
}

/// The grid itself: lambda_max * ratio^(k/(n_lambda-1)), k = 0..n_lambda-1.
std::vector<double> log_grid(double lambda_max, int n_lambda, double ratio);

// --- quadratic sub-problem (exposed for testing) ----------------------------

struct QuadraticL1Result {
  Eigen::VectorXd z;
  int sweeps = 0;
  std::vector<double> sweep_objective;  // filled when requested
};

/// Cyclic coordinate descent for
///   min_z g'(z - z0) + (z - z0)'H(z - z0)/2 + sum_j w_j |z_j|
/// starting from z0. Coordinates whose soft-threshold argument is within w_j land exactly on 0.
QuadraticL1Result solve_quadratic_l1(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad,
                                     const Eigen::VectorXd& z0, const Eigen::VectorXd& weights,
                                     double tol, int max_sweeps, bool record_objective = false);

}  // namespace pairsel
