#include "pairsel/glm_problem.hpp"

#include <numeric>
#include <vector>

#include "pairsel/error.hpp"
#include "pairsel/kernels.hpp"

namespace pairsel {

namespace {

std::vector<Index> all_columns(Index p, bool with_intercept) {
  std::vector<Index> cols;
  cols.reserve(static_cast<std::size_t>(p + 1));
  if (with_intercept) cols.push_back(kInterceptColumn);
  for (Index j = 0; j < p; ++j) cols.push_back(j);
  return cols;
}

void check_dim(const GlmProblem& problem, const Eigen::VectorXd& coef) {
  if (coef.size() != problem.dim())
    throw InvalidArgument("coefficient length " + std::to_string(coef.size()) +
                          " does not match design dimension " + std::to_string(problem.dim()));
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<double> as_span(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

std::string_view to_string(Family family) {
  return family == Family::Logistic ? "logistic" : "gaussian";
}

GlmProblem make_glm_problem(Family family, const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  if (y.size() != x.rows()) throw InvalidArgument("response and covariate row counts differ");
  if (y.size() == 0) throw DataError("empty data set");
  GlmProblem problem;
  problem.family = family;
  problem.rows = DenseRows(std::make_shared<const RowMatrix>(x));
  problem.labels = std::make_shared<const Eigen::VectorXd>(y);
  problem.intercept = true;
  problem.scale = 1.0 / static_cast<double>(y.size());
  problem.offset = 0.0;
  return problem;
}

Eigen::VectorXd linear_predictor(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                 double intercept) {
  check_dim(problem, coef);
  const auto cols = all_columns(problem.dim(), problem.intercept);
  Eigen::VectorXd full(static_cast<Index>(cols.size()));
  Index k = 0;
  if (problem.intercept) full[k++] = intercept;
  for (Index j = 0; j < coef.size(); ++j) full[k++] = coef[j];
  Eigen::VectorXd eta(problem.size());
  std::visit(
      [&](const auto& rows) { kernels::linear_predictor(rows, cols, as_span(full), as_span(eta)); },
      problem.rows);
  return eta;
}

double problem_loss(const GlmProblem& problem, const Eigen::VectorXd& coef, double intercept) {
  const Eigen::VectorXd eta = linear_predictor(problem, coef, intercept);
  return problem.scale * kernels::loss_sum(problem.family, as_span(eta), as_span(*problem.labels)) +
         problem.offset;
}

Eigen::VectorXd problem_gradient(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                 double intercept) {
  const Eigen::VectorXd eta = linear_predictor(problem, coef, intercept);
  Eigen::VectorXd d(eta.size());
  kernels::derivatives(problem.family, as_span(eta), as_span(*problem.labels), as_span(d), {});
  const auto cols = all_columns(problem.dim(), false);
  Eigen::VectorXd g(problem.dim());
  std::visit([&](const auto& rows) { kernels::weighted_column_sums(rows, cols, as_span(d), as_span(g)); },
             problem.rows);
  return problem.scale * g;
}

double problem_intercept_gradient(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                  double intercept) {
  if (!problem.intercept) return 0.0;
  const Eigen::VectorXd eta = linear_predictor(problem, coef, intercept);
  double s = 0.0;
  for (Index r = 0; r < eta.size(); ++r) s += unit_deriv(problem.family, eta[r], (*problem.labels)[r]);
  return problem.scale * s;
}

Eigen::MatrixXd problem_hessian(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                double intercept) {
  const Eigen::VectorXd eta = linear_predictor(problem, coef, intercept);
  Eigen::VectorXd d(eta.size()), h(eta.size());
  kernels::derivatives(problem.family, as_span(eta), as_span(*problem.labels), as_span(d), as_span(h));
  const auto cols = all_columns(problem.dim(), false);
  Eigen::MatrixXd out;
  std::visit([&](const auto& rows) { kernels::weighted_gram(rows, cols, as_span(h), out); },
             problem.rows);
  return problem.scale * out;
}

Eigen::VectorXd problem_hessian_vector(const GlmProblem& problem, const Eigen::VectorXd& coef,
                                       const Eigen::VectorXd& v, double intercept) {
  check_dim(problem, v);
  const Eigen::VectorXd eta = linear_predictor(problem, coef, intercept);
  Eigen::VectorXd d(eta.size()), h(eta.size());
  kernels::derivatives(problem.family, as_span(eta), as_span(*problem.labels), as_span(d), as_span(h));
  const Eigen::VectorXd xv = linear_predictor(problem, v, 0.0);
  const Eigen::VectorXd w = h.cwiseProduct(xv);
  const auto cols = all_columns(problem.dim(), false);
  Eigen::VectorXd out(problem.dim());
  std::visit([&](const auto& rows) { kernels::weighted_column_sums(rows, cols, as_span(w), as_span(out)); },
             problem.rows);
  return problem.scale * out;
}

}  // namespace pairsel
