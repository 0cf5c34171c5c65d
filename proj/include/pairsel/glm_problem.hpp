#pragma once

#include <Eigen/Dense>
#include <memory>

#include "pairsel/family.hpp"
#include "pairsel/rows.hpp"

namespace pairsel {

/// A smooth loss of the form
///
///   scale * sum_r l(eta_r; label_r) + offset,   eta_r = b0 + row_r . coef
///
/// The pairwise pseudo-likelihood is the Logistic instance without intercept;
/// the complete-case and full-data comparators are Gaussian/Logistic GLMs
/// with an unpenalized intercept. The solver works on this type only.
struct GlmProblem {
  Family family = Family::Logistic;
  RowSource rows;
  std::shared_ptr<const Eigen::VectorXd> labels;
  bool intercept = false;
  double scale = 1.0;
  double offset = 0.0;

  Index dim() const { return source_cols(rows); }
  Index size() const { return source_rows(rows); }
};

/// Gaussian or logistic GLM on raw rows, loss averaged over observations, with intercept.
GlmProblem make_glm_problem(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

/// Linear predictor for all rows.
Eigen::VectorXd linear_predictor(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                 double intercept = 0.0);

double problem_loss(const GlmProblem& problem, const Eigen::VectorXd& coef,
                    double intercept = 0.0);

/// Gradient with respect to coef (length p).
Eigen::VectorXd problem_gradient(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                 double intercept = 0.0);

/// Derivative with respect to the intercept (0 when the problem has none).
double problem_intercept_gradient(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                  double intercept);

/// p x p Hessian with respect to coef.
Eigen::MatrixXd problem_hessian(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                double intercept = 0.0);

/// Hessian-vector product without forming the Hessian.
Eigen::VectorXd problem_hessian_vector(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                       const Eigen::VectorXd& v, double intercept = 0.0);

}  // namespace pairsel
