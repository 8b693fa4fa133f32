#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vrsg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SparseEntry {
  std::size_t index;
  double value;
  bool operator==(const SparseEntry&) const = default;
};

using SparseRow = std::vector<SparseEntry>;

/// Row-major (CSR) design matrix with a cache of squared row norms.
///
/// Column indices inside each row are strictly increasing and below
/// `n_cols()`; the constructor rejects anything else. Explicit zeros are kept
/// as stored entries.
class SparseDesignMatrix {
 public:
  SparseDesignMatrix() = default;
  SparseDesignMatrix(std::size_t n_cols, const std::vector<SparseRow>& rows);

  static SparseDesignMatrix from_dense(const Matrix& dense);

  std::size_t n_rows() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return entries_.size(); }

  std::span<const SparseEntry> row(std::size_t i) const {
    return {entries_.data() + row_ptr_[i], entries_.data() + row_ptr_[i + 1]};
  }
  double row_sq_norm(std::size_t i) const { return row_sq_norms_[i]; }
  const std::vector<double>& row_sq_norms() const noexcept { return row_sq_norms_; }

  double row_dot(std::size_t i, const Vector& w) const;
  // w += alpha * x_i
  void add_row_scaled(std::size_t i, double alpha, Vector& w) const;

  Vector multiply(const Vector& w) const;             // X w
  Vector transpose_multiply(const Vector& u) const;   // X^T u
  Matrix to_dense() const;

  bool operator==(const SparseDesignMatrix&) const = default;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<SparseEntry> entries_;
  std::vector<double> row_sq_norms_;
};

}  // namespace vrsg
