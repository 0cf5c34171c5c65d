#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pairsel/glm_problem.hpp"
#include "pairsel/rows.hpp"
#include "pairsel/table.hpp"

namespace pairsel {

/// The fully observed subjects of a data set with missing values.
struct CompleteCases {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // n x p
  std::vector<std::string> covariate_names;
  std::vector<Index> source_rows;  // 0-based row of each case in the originating table
  Index total_rows = 0;            // N, including incomplete rows

  Index n() const { return y.size(); }
  Index p() const { return x.cols(); }
  double observed_fraction() const {
    return total_rows > 0 ? static_cast<double>(n()) / static_cast<double>(total_rows) : 0.0;
  }
};

/// Wraps already-complete data. Rejects non-finite entries and shape mismatches.
CompleteCases make_complete_cases(Eigen::VectorXd y, Eigen::MatrixXd x);

/// Rows of `table` with no missing entry in the response or any covariate,
/// in original order. Empty `covariates` means every column except the response.
CompleteCases extract_complete_cases(const Table& table, const std::string& response,
                                     const std::vector<std::string>& covariates = {});

/// The cases at `indices`, in the given order.
CompleteCases subset_cases(const CompleteCases& cases, std::span<const Index> indices);

struct PairwiseOptions {
  /// Materialize the m x p pair matrix when m * p is at most this many scalars;
  /// otherwise rows are generated on the fly from the subject covariates.
  std::int64_t materialize_budget = 200'000'000;
};

/// Pairwise-difference design. One row per unordered pair i < j with
/// y_i != y_j: v = (x_i - x_j)|y_i - y_j|, u = 1{y_i > y_j}. Tied pairs are
/// dropped from the rows and enter only through c = 2m / (n(n-1)).
class PairwiseDesign {
 public:
  Index n() const { return n_; }
  Index m() const { return m_; }
  Index p() const { return p_; }
  double c() const { return c_; }
  bool materialized() const { return std::holds_alternative<DenseRows>(problem_.rows); }

  std::span<const std::uint32_t> first() const { return pairs_->first; }
  std::span<const std::uint32_t> second() const { return pairs_->second; }
  const Eigen::VectorXd& u() const { return *problem_.labels; }

  /// v_k.
  Eigen::VectorXd row(Index k) const;

  /// The logistic (no intercept) problem whose loss equals the pairwise loss.
  const GlmProblem& problem() const { return problem_; }

 private:
  friend PairwiseDesign build_pairwise(const CompleteCases&, const PairwiseOptions&);

  Index n_ = 0;
  Index m_ = 0;
  Index p_ = 0;
  double c_ = 0.0;
  std::shared_ptr<const PairRows::Pairs> pairs_;
  GlmProblem problem_;
};

/// Throws InvalidArgument when n < 2.
PairwiseDesign build_pairwise(const CompleteCases& cases, const PairwiseOptions& options = {});

/// L(gamma) = 2/(n(n-1)) sum_{i<j} log(1 + exp(-(y_i - y_j)(x_i - x_j)'gamma)).
double pairwise_loss(const PairwiseDesign& design, const Eigen::VectorXd& gamma);

/// (1/m) sum_k log(1 + exp(w_k v_k'gamma)), w_k = -sign(y_i - y_j): the intercept-free
/// logistic negative log-likelihood of the reduced problem (log 2 when m = 0).
double reduced_logistic_loss(const PairwiseDesign& design, const Eigen::VectorXd& gamma);

Eigen::VectorXd pairwise_gradient(const PairwiseDesign& design, const Eigen::VectorXd& gamma);

/// Root mean square of each column of V over the m pairs. Scaling covariate j
/// by 1/s_j gives V unit-RMS columns; a fit on that scale maps back through
/// gamma_j = gamma_scaled_j / s_j. Throws DataError for a column that is zero on every pair.
Eigen::VectorXd pair_column_scales(const PairwiseDesign& design);

inline constexpr std::int64_t kDefaultHessianBudget = 25'000'000;

/// p x p Hessian. Throws InvalidArgument when p*p exceeds `max_entries`;
/// use pairwise_hessian_vector in that case.
Eigen::MatrixXd pairwise_hessian(const PairwiseDesign& design, const Eigen::VectorXd& gamma,
                                 std::int64_t max_entries = kDefaultHessianBudget);

Eigen::VectorXd pairwise_hessian_vector(const PairwiseDesign& design, const Eigen::VectorXd& gamma,
                                        const Eigen::VectorXd& v);

}  // namespace pairsel
