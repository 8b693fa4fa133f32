#include "vrsg/sparse_matrix.hpp"

#include <cmath>
#include <string>

#include "vrsg/errors.hpp"

namespace vrsg {

SparseDesignMatrix::SparseDesignMatrix(std::size_t n_cols, const std::vector<SparseRow>& rows)
    : n_cols_(n_cols) {
  row_ptr_.reserve(rows.size() + 1);
  row_sq_norms_.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const auto& e = rows[i][k];
      if (e.index >= n_cols) {
        throw InvalidArgument("row " + std::to_string(i) + ": column index " +
                              std::to_string(e.index) + " out of range for " +
                              std::to_string(n_cols) + " columns");
      }
      if (k > 0 && e.index <= rows[i][k - 1].index) {
        throw InvalidArgument("row " + std::to_string(i) +
                              ": column indices must be strictly increasing");
      }
      if (!std::isfinite(e.value)) {
        throw InvalidArgument("row " + std::to_string(i) + ": non-finite value");
      }
      sq += e.value * e.value;
      entries_.push_back(e);
    }
    row_ptr_.push_back(entries_.size());
    row_sq_norms_.push_back(sq);
  }
}

SparseDesignMatrix SparseDesignMatrix::from_dense(const Matrix& dense) {
  std::vector<SparseRow> rows(static_cast<std::size_t>(dense.rows()));
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        rows[static_cast<std::size_t>(i)].push_back({static_cast<std::size_t>(j), dense(i, j)});
      }
    }
  }
  return SparseDesignMatrix(static_cast<std::size_t>(dense.cols()), rows);
}

double SparseDesignMatrix::row_dot(std::size_t i, const Vector& w) const {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.value * w[static_cast<Eigen::Index>(e.index)];
  return s;
}

void SparseDesignMatrix::add_row_scaled(std::size_t i, double alpha, Vector& w) const {
  for (const auto& e : row(i)) w[static_cast<Eigen::Index>(e.index)] += alpha * e.value;
}

Vector SparseDesignMatrix::multiply(const Vector& w) const {
  if (static_cast<std::size_t>(w.size()) != n_cols_) {
    throw InvalidArgument("multiply: vector length " + std::to_string(w.size()) +
                          " != n_cols " + std::to_string(n_cols_));
  }
  Vector out(static_cast<Eigen::Index>(n_rows()));
  for (std::size_t i = 0; i < n_rows(); ++i) out[static_cast<Eigen::Index>(i)] = row_dot(i, w);
  return out;
}

Vector SparseDesignMatrix::transpose_multiply(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != n_rows()) {
    throw InvalidArgument("transpose_multiply: vector length " + std::to_string(u.size()) +
                          " != n_rows " + std::to_string(n_rows()));
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_cols_));
  for (std::size_t i = 0; i < n_rows(); ++i) add_row_scaled(i, u[static_cast<Eigen::Index>(i)], out);
  return out;
}

Matrix SparseDesignMatrix::to_dense() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n_rows()), static_cast<Eigen::Index>(n_cols_));
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (const auto& e : row(i)) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.index)) = e.value;
    }
  }
  return out;
}

}  // namespace vrsg
