#pragma once

#include <cstdint>
#include <vector>

#include "cmm/hashing.hpp"
#include "cmm/matrix.hpp"
#include "cmm/sketch.hpp"

namespace cmm::reference {

/// Deliberately naive oracles used by tests and acceptance checks. None of
/// them share code with the sketch path.

/// Triple-loop exact product.
DenseMatrix exact_product(const DenseMatrix& a, const DenseMatrix& b,
                          std::size_t entry_cap = kDefaultEntryCap);
DenseMatrix exact_product(const SparseMatrix& a, const SparseMatrix& b,
                          std::size_t entry_cap = kDefaultEntryCap);

/// Computes the exact product first, then accumulates every entry into its
/// bucket per repetition: c_k = sum over h(i,j)=k of s(i,j)*(AB)_ij.
std::vector<std::vector<double>> naive_countsketch(const DenseMatrix& a, const DenseMatrix& b,
                                                   const std::vector<PairHashFamily>& families,
                                                   std::size_t entry_cap = kDefaultEntryCap);

/// Tabulated hash functions, for tests that need to relabel indices.
struct HashTables {
  std::uint32_t buckets = 0;
  std::vector<std::uint32_t> bucket1, bucket2;
  std::vector<double> sign1, sign2;

  static HashTables tabulate(const PairHashFamily& f, std::size_t n1, std::size_t n3);
};

std::vector<std::vector<double>> naive_countsketch(const DenseMatrix& a, const DenseMatrix& b,
                                                   const std::vector<HashTables>& tables,
                                                   std::size_t entry_cap = kDefaultEntryCap);

/// Squared Frobenius norm of m with its k largest-magnitude entries removed.
double err_f_k(const DenseMatrix& m, std::size_t k);

/// Direct formula Q = (1/(m-1)) * sum_i (x_i - mean)(x_i - mean)^T over the
/// columns of an n-by-m observation matrix.
DenseMatrix exact_covariance(const DenseMatrix& observations);

}  // namespace cmm::reference
