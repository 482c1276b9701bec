#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmm/errors.hpp"

namespace cmm {

/// Dense real matrix, row-major storage. All values must be finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  DenseMatrix transposed() const;

  /// Count of entries that are exactly nonzero.
  std::size_t nnz() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Layout { ColumnMajor, RowMajor };

/// Sparse real matrix in compressed column-major or row-major form.
/// Indices are 0-based and strictly increasing within each line; stored
/// values are never zero.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, Layout layout,
               std::vector<std::size_t> offsets, std::vector<std::size_t> indices,
               std::vector<double> values);

  /// Builds canonical storage from (row, col, value) triplets: duplicates
  /// are summed, exact zeros dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, Layout layout,
                                    std::span<const std::size_t> rows_idx,
                                    std::span<const std::size_t> cols_idx,
                                    std::span<const double> values);

  static SparseMatrix from_dense(const DenseMatrix& m, Layout layout = Layout::ColumnMajor);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Layout layout() const { return layout_; }
  std::size_t nnz() const { return values_.size(); }

  /// Number of compressed lines (columns when column-major, rows otherwise).
  std::size_t lines() const { return layout_ == Layout::ColumnMajor ? cols_ : rows_; }

  std::span<const std::size_t> line_indices(std::size_t k) const {
    return {indices_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  std::span<const double> line_values(std::size_t k) const {
    return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::size_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  DenseMatrix to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Layout layout_ = Layout::ColumnMajor;
  std::vector<std::size_t> offsets_;  // lines()+1 entries, monotone
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

/// Random diagonal scaling with all entries nonzero.
struct DiagonalScaling {
  std::vector<double> entries;

  std::size_t length() const { return entries.size(); }
};

/// Reads a Matrix Market file (coordinate or array format, real or integer
/// field, general or symmetric). Explicit zeros are dropped and symmetric
/// storage is expanded. Result is column-major.
SparseMatrix load_matrix_market(const std::string& path);

/// Writes coordinate-format Matrix Market (general symmetry, real field).
void save_matrix_market(const std::string& path, const SparseMatrix& m);
void save_matrix_market(const std::string& path, const DenseMatrix& m);

/// Returns the same logical matrix in the requested layout.
SparseMatrix to_layout(const SparseMatrix& m, Layout layout);

/// Entries drawn independently, uniform over {1, ..., 2^31 - 1}, stored as
/// doubles. Deterministic in the seed.
DiagonalScaling random_diagonal(std::size_t len, std::uint64_t seed);

DenseMatrix apply_diagonal_left(const DiagonalScaling& d, const DenseMatrix& m);
DenseMatrix apply_diagonal_right(const DenseMatrix& m, const DiagonalScaling& d);
SparseMatrix apply_diagonal_left(const DiagonalScaling& d, const SparseMatrix& m);
SparseMatrix apply_diagonal_right(const SparseMatrix& m, const DiagonalScaling& d);

double frobenius_norm(const DenseMatrix& m);
double frobenius_norm(const SparseMatrix& m);

}  // namespace cmm
