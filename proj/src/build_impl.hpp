#pragma once

#include <optional>

#include "cmm/matrix.hpp"
#include "cmm/recovery.hpp"
#include "cmm/sketch.hpp"

namespace cmm::detail {

// Enumerates the nonzeros of column k of A (or row k of B) without
// materializing anything. Sparse inputs are layout-converted once if needed.
class LineSource {
 public:
  static LineSource columns(const DenseMatrix& m) { return LineSource(&m, nullptr, true); }
  static LineSource rows(const DenseMatrix& m) { return LineSource(&m, nullptr, false); }
  static LineSource columns(const SparseMatrix& m) {
    LineSource s(nullptr, &m, true);
    if (m.layout() != Layout::ColumnMajor) {
      s.owned_ = to_layout(m, Layout::ColumnMajor);
      s.sparse_ = &*s.owned_;
    }
    return s;
  }
  static LineSource rows(const SparseMatrix& m) {
    LineSource s(nullptr, &m, false);
    if (m.layout() != Layout::RowMajor) {
      s.owned_ = to_layout(m, Layout::RowMajor);
      s.sparse_ = &*s.owned_;
    }
    return s;
  }

  std::size_t lines() const {
    if (dense_) return column_mode_ ? dense_->cols() : dense_->rows();
    return sparse_->lines();
  }
  std::size_t dim() const {
    if (dense_) return column_mode_ ? dense_->rows() : dense_->cols();
    return column_mode_ ? sparse_->rows() : sparse_->cols();
  }
  bool line_empty(std::size_t k) const {
    return sparse_ != nullptr && sparse_->line_indices(k).empty();
  }

  template <class F>
  void for_each(std::size_t k, F&& f) const {
    if (dense_) {
      if (column_mode_) {
        for (std::size_t i = 0; i < dense_->rows(); ++i) f(i, (*dense_)(i, k));
      } else {
        for (std::size_t j = 0; j < dense_->cols(); ++j) f(j, (*dense_)(k, j));
      }
    } else {
      auto idx = sparse_->line_indices(k);
      auto val = sparse_->line_values(k);
      for (std::size_t p = 0; p < idx.size(); ++p) f(idx[p], val[p]);
    }
  }

 private:
  LineSource(const DenseMatrix* dense, const SparseMatrix* sparse, bool column_mode)
      : dense_(dense), sparse_(sparse), column_mode_(column_mode) {}

  const DenseMatrix* dense_ = nullptr;
  std::optional<SparseMatrix> owned_;
  const SparseMatrix* sparse_ = nullptr;
  bool column_mode_ = true;
};

struct FamilyBuild {
  std::vector<std::vector<double>> unmasked;             // d x b
  std::vector<std::vector<std::vector<double>>> masked;  // d x (ell_row+ell_col) x b
};

// Core of COMPRESSEDPRODUCT: per outer product, per repetition, accumulate
// the componentwise polynomial products in the Fourier basis; one inverse
// transform per coefficient vector at the end. With codes given, the masked
// families are built in the same pass by skipping terms whose codeword bit
// is zero. Parallelism is across repetitions only, so results are bitwise
// independent of the thread count.
FamilyBuild build_families(const LineSource& a, const LineSource& b,
                           const std::vector<PairHashFamily>& families, const Code* row_code,
                           const Code* col_code, unsigned threads, BuildStats* stats);

std::vector<PairHashFamily> make_families(const SketchParams& effective);

}  // namespace cmm::detail
