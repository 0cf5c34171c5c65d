#pragma once

// OpenMP kernels over row sources. Every reduction is computed per fixed-size
// row block and the block partials are summed in block order, so results are
// bit-identical for any thread count. The serial reference versions used by
// the tests and the benchmark live in kernels_serial.hpp.

#include <Eigen/Dense>
#include <algorithm>
#include <span>
#include <vector>

#include "pairsel/family.hpp"
#include "pairsel/rows.hpp"

namespace pairsel::kernels {

inline constexpr Index kBlockRows = 2048;

inline Index block_count(Index m) { return (m + kBlockRows - 1) / kBlockRows; }

/// eta[r] = sum_k coef[k] * row(r)[cols[k]]
template <class Rows>
void linear_predictor(const Rows& rows, std::span<const Index> cols,
                      std::span<const double> coef, std::span<double> eta) {
  const Index m = rows.rows();
  const auto a = static_cast<Index>(cols.size());
  if (a == 0) {
    std::fill(eta.begin(), eta.end(), 0.0);
    return;
  }
#pragma omp parallel if (m > kBlockRows)
  {
    std::vector<double> buf(static_cast<std::size_t>(a));
#pragma omp for schedule(static)
    for (Index r = 0; r < m; ++r) {
      rows.gather(r, cols, buf.data());
      double s = 0.0;
      for (Index k = 0; k < a; ++k) s += coef[k] * buf[k];
      eta[r] = s;
    }
  }
}

/// out[k] = sum_r w[r] * row(r)[cols[k]]
template <class Rows>
void weighted_column_sums(const Rows& rows, std::span<const Index> cols,
                          std::span<const double> w, std::span<double> out) {
  const Index m = rows.rows();
  const auto a = static_cast<Index>(cols.size());
  const Index nb = block_count(m);
  std::vector<double> partial(static_cast<std::size_t>(nb * a), 0.0);
#pragma omp parallel if (nb > 1)
  {
    std::vector<double> buf(static_cast<std::size_t>(a));
#pragma omp for schedule(static)
    for (Index b = 0; b < nb; ++b) {
      double* acc = partial.data() + b * a;
      const Index end = std::min(m, (b + 1) * kBlockRows);
      for (Index r = b * kBlockRows; r < end; ++r) {
        rows.gather(r, cols, buf.data());
        const double wr = w[r];
        for (Index k = 0; k < a; ++k) acc[k] += wr * buf[k];
      }
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (Index b = 0; b < nb; ++b)
    for (Index k = 0; k < a; ++k) out[k] += partial[b * a + k];
}

/// out = sum_r h[r] * row(r)[cols] row(r)[cols]^T  (|cols| x |cols|, symmetric)
template <class Rows>
void weighted_gram(const Rows& rows, std::span<const Index> cols, std::span<const double> h,
                   Eigen::MatrixXd& out) {
  const Index m = rows.rows();
  const auto a = static_cast<Index>(cols.size());
  const Index nb = block_count(m);
  const Index tri = a * (a + 1) / 2;
  std::vector<double> partial(static_cast<std::size_t>(nb * tri), 0.0);
#pragma omp parallel if (nb > 1)
  {
    std::vector<double> buf(static_cast<std::size_t>(a));
#pragma omp for schedule(static)
    for (Index b = 0; b < nb; ++b) {
      double* acc = partial.data() + b * tri;
      const Index end = std::min(m, (b + 1) * kBlockRows);
      for (Index r = b * kBlockRows; r < end; ++r) {
        rows.gather(r, cols, buf.data());
        const double hr = h[r];
        Index t = 0;
        for (Index i = 0; i < a; ++i) {
          const double hi = hr * buf[i];
          for (Index j = i; j < a; ++j) acc[t++] += hi * buf[j];
        }
      }
    }
  }
  out.setZero(a, a);
  for (Index b = 0; b < nb; ++b) {
    const double* acc = partial.data() + b * tri;
    Index t = 0;
    for (Index i = 0; i < a; ++i)
      for (Index j = i; j < a; ++j) out(i, j) += acc[t++];
  }
  for (Index i = 0; i < a; ++i)
    for (Index j = 0; j < i; ++j) out(i, j) = out(j, i);
}

/// sum_r unit_loss(eta[r], y[r])
inline double loss_sum(Family family, std::span<const double> eta, std::span<const double> y) {
  const auto m = static_cast<Index>(eta.size());
  const Index nb = block_count(m);
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static) if (nb > 1)
  for (Index b = 0; b < nb; ++b) {
    double s = 0.0;
    const Index end = std::min(m, (b + 1) * kBlockRows);
    for (Index r = b * kBlockRows; r < end; ++r) s += unit_loss(family, eta[r], y[r]);
    partial[b] = s;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

/// d[r] = dl/deta, h[r] = d2l/deta2 (h may be empty when curvature is not needed)
inline void derivatives(Family family, std::span<const double> eta, std::span<const double> y,
                        std::span<double> d, std::span<double> h) {
  const auto m = static_cast<Index>(eta.size());
  const bool want_h = !h.empty();
#pragma omp parallel for schedule(static) if (m > kBlockRows)
  for (Index r = 0; r < m; ++r) {
    d[r] = unit_deriv(family, eta[r], y[r]);
    if (want_h) h[r] = unit_curvature(family, eta[r]);
  }
}

}  // namespace pairsel::kernels
