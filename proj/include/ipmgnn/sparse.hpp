#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ipmgnn {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Immutable sparse matrix holding both a row-major and a column-major
// adjacency view. Explicit zeros are dropped at construction; duplicate
// (row, col) pairs, out-of-range indices and non-finite values throw.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<Triplet> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return row_entries_.size(); }

  // Entries sorted by (row, col).
  std::span<const Triplet> entries() const { return row_entries_; }

  // Column indices / values of row i, ascending column.
  std::span<const int> row_indices(int i) const;
  std::span<const double> row_values(int i) const;
  // Row indices / values of column j, ascending row.
  std::span<const int> col_indices(int j) const;
  std::span<const double> col_values(int j) const;

  int row_count(int i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  int col_count(int j) const { return col_ptr_[j + 1] - col_ptr_[j]; }

  // y = A x through the row-major view.
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  // y = A^T v through the column-major view.
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& v) const;
  // Same products through the opposite view (scatter form).
  Eigen::VectorXd multiply_by_columns(const Eigen::VectorXd& x) const;
  Eigen::VectorXd multiply_transpose_by_rows(const Eigen::VectorXd& v) const;

  SparseMatrix negated() const;
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_entries_ == b.row_entries_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Triplet> row_entries_;
  std::vector<int> row_ptr_{0};
  std::vector<int> row_col_;
  std::vector<double> row_val_;
  std::vector<int> col_ptr_{0};
  std::vector<int> col_row_;
  std::vector<double> col_val_;
};

// Sum of a[i] * b[i] accumulated left to right from 0.0. Used wherever a
// result has to match an edge-ordered aggregation bit for bit.
double ordered_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace ipmgnn
