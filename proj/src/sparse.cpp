#include "ipmgnn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ipmgnn/errors.hpp"

namespace ipmgnn {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
  std::erase_if(entries, [](const Triplet& t) { return t.value == 0.0; });
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InvalidInstance("matrix entry (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") out of range");
    }
    if (!std::isfinite(t.value)) {
      throw InvalidInstance("non-finite matrix entry at (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ")");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      throw InvalidInstance("duplicate matrix entry (" + std::to_string(entries[k].row) + ", " +
                            std::to_string(entries[k].col) + ")");
    }
  }
  row_entries_ = std::move(entries);

  row_ptr_.assign(rows_ + 1, 0);
  col_ptr_.assign(cols_ + 1, 0);
  for (const auto& t : row_entries_) {
    ++row_ptr_[t.row + 1];
    ++col_ptr_[t.col + 1];
  }
  for (int i = 0; i < rows_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (int j = 0; j < cols_; ++j) col_ptr_[j + 1] += col_ptr_[j];

  row_col_.resize(row_entries_.size());
  row_val_.resize(row_entries_.size());
  col_row_.resize(row_entries_.size());
  col_val_.resize(row_entries_.size());
  std::vector<int> col_fill(col_ptr_.begin(), col_ptr_.end() - 1);
  // Entries are row-sorted, so each column list fills in ascending row order.
  for (std::size_t k = 0; k < row_entries_.size(); ++k) {
    const auto& t = row_entries_[k];
    row_col_[k] = t.col;
    row_val_[k] = t.value;
    const int slot = col_fill[t.col]++;
    col_row_[slot] = t.row;
    col_val_[slot] = t.value;
  }
}

std::span<const int> SparseMatrix::row_indices(int i) const {
  return {row_col_.data() + row_ptr_[i], static_cast<std::size_t>(row_count(i))};
}
std::span<const double> SparseMatrix::row_values(int i) const {
  return {row_val_.data() + row_ptr_[i], static_cast<std::size_t>(row_count(i))};
}
std::span<const int> SparseMatrix::col_indices(int j) const {
  return {col_row_.data() + col_ptr_[j], static_cast<std::size_t>(col_count(j))};
}
std::span<const double> SparseMatrix::col_values(int j) const {
  return {col_val_.data() + col_ptr_[j], static_cast<std::size_t>(col_count(j))};
}

Eigen::VectorXd SparseMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw DimensionError("multiply: vector length != cols");
  Eigen::VectorXd y(rows_);
  for (int i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += row_val_[k] * x[row_col_[k]];
    y[i] = acc;
  }
  return y;
}

Eigen::VectorXd SparseMatrix::multiply_transpose(const Eigen::VectorXd& v) const {
  if (v.size() != rows_) throw DimensionError("multiply_transpose: vector length != rows");
  Eigen::VectorXd y(cols_);
  for (int j = 0; j < cols_; ++j) {
    double acc = 0.0;
    for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) acc += col_val_[k] * v[col_row_[k]];
    y[j] = acc;
  }
  return y;
}

Eigen::VectorXd SparseMatrix::multiply_by_columns(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw DimensionError("multiply: vector length != cols");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (int j = 0; j < cols_; ++j) {
    for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) y[col_row_[k]] += col_val_[k] * x[j];
  }
  return y;
}

Eigen::VectorXd SparseMatrix::multiply_transpose_by_rows(const Eigen::VectorXd& v) const {
  if (v.size() != rows_) throw DimensionError("multiply_transpose: vector length != rows");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[row_col_[k]] += row_val_[k] * v[i];
  }
  return y;
}

SparseMatrix SparseMatrix::negated() const {
  std::vector<Triplet> flipped(row_entries_);
  for (auto& t : flipped) t.value = -t.value;
  return SparseMatrix(rows_, cols_, std::move(flipped));
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows_, cols_);
  for (const auto& t : row_entries_) dense(t.row, t.col) = t.value;
  return dense;
}

double ordered_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DimensionError("ordered_dot: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace ipmgnn
