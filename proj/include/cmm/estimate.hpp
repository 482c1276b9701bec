#pragma once

#include <cstdint>
#include <vector>

#include "cmm/matrix.hpp"

namespace cmm {

/// Result of the doubling search for an upper bound on nnz(AB).
struct NnzEstimate {
  std::size_t upper_bound = 0;
  std::size_t terminating_b = 0;
  bool capped = false;  // search hit the trivial bound 2*n1*n3
  /// Worst zero fraction across the d hash functions, one entry per level.
  std::vector<double> zero_fraction_per_level;
  /// Per-level failure probability bound (3/4)^d of the termination test.
  double level_failure_bound = 0.0;
};

/// Doubling search over b = 2, 4, 8, ... on sketches of D_L*A*B*D_R, with
/// random integer diagonal scalings applied once so that cancellation-born
/// zeros stay zero with high probability. Terminates at the first b where at
/// least 4/5 of the buckets are zero for every hash function.
NnzEstimate estimate_nnz(const DenseMatrix& a, const DenseMatrix& b, std::uint32_t reps,
                         std::uint64_t seed);
NnzEstimate estimate_nnz(const SparseMatrix& a, const SparseMatrix& b, std::uint32_t reps,
                         std::uint64_t seed);

struct FrobeniusEstimate {
  double median_square = 0.0;
  double upper_bound = 0.0;  // 32 * median_square
  std::uint32_t reps = 0;
};

/// Median over d independent AMS sketches X of AB (4-wise independent
/// signs); X^2 is an unbiased estimator of ||AB||_F^2 and 32*median is an
/// upper bound with high probability.
FrobeniusEstimate estimate_frobenius_ub(const DenseMatrix& a, const DenseMatrix& b,
                                        std::uint32_t reps, std::uint64_t seed);
FrobeniusEstimate estimate_frobenius_ub(const SparseMatrix& a, const SparseMatrix& b,
                                        std::uint32_t reps, std::uint64_t seed);

}  // namespace cmm
