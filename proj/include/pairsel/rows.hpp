#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace pairsel {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Column index that stands for the all-ones intercept column.
inline constexpr Index kInterceptColumn = -1;

// ---------------------------------------------------------------------------
// Row sources. A row source presents an m x p design one row at a time; the
// kernels only ever call rows(), cols(), value() and gather().

/// Materialized row-major design.
class DenseRows {
 public:
  DenseRows() = default;
  explicit DenseRows(std::shared_ptr<const RowMatrix> data)
      : owner_(std::move(data)),
        data_(owner_->data()),
        rows_(owner_->rows()),
        cols_(owner_->cols()) {}

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }

  double value(Index r, Index j) const noexcept {
    return j < 0 ? 1.0 : data_[r * cols_ + j];
  }

  void gather(Index r, std::span<const Index> cols, double* out) const noexcept {
    const double* row = data_ + r * cols_;
    for (std::size_t k = 0; k < cols.size(); ++k) out[k] = cols[k] < 0 ? 1.0 : row[cols[k]];
  }

  const RowMatrix& matrix() const { return *owner_; }

 private:
  std::shared_ptr<const RowMatrix> owner_;
  const double* data_ = nullptr;
  Index rows_ = 0;
  Index cols_ = 0;
};

/// Pairwise-difference rows generated on the fly: row k is
/// (x_first[k] - x_second[k]) * scale[k]. Nothing of size m x p is stored.
class PairRows {
 public:
  struct Pairs {
    std::vector<std::uint32_t> first;
    std::vector<std::uint32_t> second;
    std::vector<double> scale;
  };

  PairRows() = default;
  PairRows(std::shared_ptr<const RowMatrix> x, std::shared_ptr<const Pairs> pairs)
      : x_owner_(std::move(x)),
        pairs_(std::move(pairs)),
        x_(x_owner_->data()),
        p_(x_owner_->cols()),
        m_(static_cast<Index>(pairs_->first.size())) {}

  Index rows() const noexcept { return m_; }
  Index cols() const noexcept { return p_; }

  double value(Index r, Index j) const noexcept {
    if (j < 0) return 1.0;
    const auto& pr = *pairs_;
    return (x_[pr.first[r] * p_ + j] - x_[pr.second[r] * p_ + j]) * pr.scale[r];
  }

  void gather(Index r, std::span<const Index> cols, double* out) const noexcept {
    const auto& pr = *pairs_;
    const double* xi = x_ + pr.first[r] * p_;
    const double* xj = x_ + pr.second[r] * p_;
    const double s = pr.scale[r];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Index c = cols[k];
      out[k] = c < 0 ? 1.0 : (xi[c] - xj[c]) * s;
    }
  }

 private:
  std::shared_ptr<const RowMatrix> x_owner_;
  std::shared_ptr<const Pairs> pairs_;
  const double* x_ = nullptr;
  Index p_ = 0;
  Index m_ = 0;
};

using RowSource = std::variant<DenseRows, PairRows>;

inline Index source_rows(const RowSource& rows) {
  return std::visit([](const auto& r) { return r.rows(); }, rows);
}

inline Index source_cols(const RowSource& rows) {
  return std::visit([](const auto& r) { return r.cols(); }, rows);
}

}  // namespace pairsel
