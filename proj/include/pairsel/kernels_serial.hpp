#pragma once

// Plain single-accumulator versions of the kernels in kernels.hpp. Kept as
// the reference the parallel kernels are tested and benchmarked against.

#include <Eigen/Dense>
#include <span>

#include "pairsel/family.hpp"
#include "pairsel/rows.hpp"

namespace pairsel::kernels::serial {

template <class Rows>
void linear_predictor(const Rows& rows, std::span<const Index> cols,
                      std::span<const double> coef, std::span<double> eta) {
  for (Index r = 0; r < rows.rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += coef[k] * rows.value(r, cols[k]);
    eta[r] = s;
  }
}

template <class Rows>
void weighted_column_sums(const Rows& rows, std::span<const Index> cols,
                          std::span<const double> w, std::span<double> out) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    double s = 0.0;
    for (Index r = 0; r < rows.rows(); ++r) s += w[r] * rows.value(r, cols[k]);
    out[k] = s;
  }
}

template <class Rows>
void weighted_gram(const Rows& rows, std::span<const Index> cols, std::span<const double> h,
                   Eigen::MatrixXd& out) {
  const auto a = static_cast<Index>(cols.size());
  out.setZero(a, a);
  for (Index r = 0; r < rows.rows(); ++r)
    for (Index i = 0; i < a; ++i)
      for (Index j = 0; j < a; ++j)
        out(i, j) += h[r] * rows.value(r, cols[i]) * rows.value(r, cols[j]);
}

inline double loss_sum(Family family, std::span<const double> eta, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t r = 0; r < eta.size(); ++r) s += unit_loss(family, eta[r], y[r]);
  return s;
}

inline void derivatives(Family family, std::span<const double> eta, std::span<const double> y,
                        std::span<double> d, std::span<double> h) {
  for (std::size_t r = 0; r < eta.size(); ++r) {
    d[r] = unit_deriv(family, eta[r], y[r]);
    if (!h.empty()) h[r] = unit_curvature(family, eta[r]);
  }
}

}  // namespace pairsel::kernels::serial
