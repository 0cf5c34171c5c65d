#pragma once

#include <Eigen/Dense>
#include <random>

#include "pairsel/pairwise.hpp"

namespace pairsel::test {

/// n x p standard normal covariates with a continuous or binary response
/// drawn from a linear index.
inline CompleteCases random_cases(Index n, Index p, std::uint64_t seed, bool binary = false,
                                  double signal = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = normal(rng);
  Eigen::VectorXd beta(p);
  for (Index j = 0; j < p; ++j) beta[j] = j < 2 ? signal * (j == 0 ? 1.0 : -0.5) : 0.0;
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const double eta = x.row(i).dot(beta);
    y[i] = binary ? (unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0) : eta + normal(rng);
  }
  return make_complete_cases(y, x);
}

inline Eigen::VectorXd random_vector(Index p, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(p);
  for (Index j = 0; j < p; ++j) v[j] = normal(rng);
  return v;
}

}  // namespace pairsel::test
