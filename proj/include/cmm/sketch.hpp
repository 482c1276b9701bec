#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cmm/hashing.hpp"
#include "cmm/matrix.hpp"

namespace cmm {

/// Refuse to materialize dense results above this many entries by default.
inline constexpr std::size_t kDefaultEntryCap = std::size_t(1) << 26;

struct SketchParams {
  std::uint32_t buckets = 2;   // rounded up to a power of two at validation
  std::uint32_t reps = 0;      // 0 -> max(1, 6*ceil(lg(max(n1,n3))))
  std::uint64_t seed = 0;
  SignIndependence sign_independence = SignIndependence::TwoWise;
  unsigned threads = 1;        // 0 -> hardware concurrency
};

/// Auxiliary-memory and wall-time accounting for one sketch build.
struct BuildStats {
  std::size_t aux_bytes = 0;
  double wall_seconds = 0.0;
};

struct EntryEstimate {
  double value = 0.0;
  std::vector<double> per_repetition;
};

std::uint32_t default_reps(std::size_t n1, std::size_t n3);

/// Rounds buckets up to the next power of two (>= 2), resolves reps == 0 to
/// the default, clamps threads. The result is the effective parameter set.
SketchParams validate_params(SketchParams p, std::size_t n1, std::size_t n3);

/// Median with the even case resolved as the mean of the two central order
/// statistics, which stays exact whenever a strict majority agree.
double median_of(std::vector<double> values);

/// d repetitions of a b-bucket count sketch of a matrix product, built
/// without materializing the product.
class SketchSet {
 public:
  SketchSet() = default;
  SketchSet(std::size_t n1, std::size_t n2, std::size_t n3, SketchParams effective,
            std::vector<PairHashFamily> families, std::vector<std::vector<double>> coeff);

  /// Rebuilds the hash families from the seed in `effective`.
  static SketchSet from_parts(std::size_t n1, std::size_t n2, std::size_t n3,
                              SketchParams effective, std::vector<std::vector<double>> coeff);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t n3() const { return n3_; }
  const SketchParams& params() const { return params_; }
  std::uint32_t buckets() const { return params_.buckets; }
  std::uint32_t reps() const { return params_.reps; }
  const std::vector<PairHashFamily>& families() const { return families_; }

  std::span<const double> coefficients(std::size_t t) const { return coeff_[t]; }

  /// Linear bucket update; used when subtracting exactly-known contributions
  /// (e.g. covariance diagonals).
  void add_to_bucket(std::size_t t, std::size_t k, double delta) { coeff_[t][k] += delta; }

  double decompress_value(std::size_t i, std::size_t j) const;
  EntryEstimate decompress(std::size_t i, std::size_t j) const;
  DenseMatrix decompress_all(std::size_t entry_cap = kDefaultEntryCap) const;

 private:
  std::size_t n1_ = 0, n2_ = 0, n3_ = 0;
  SketchParams params_;
  std::vector<PairHashFamily> families_;
  std::vector<std::vector<double>> coeff_;  // d vectors of length b
};

SketchSet compressed_product(const DenseMatrix& a, const DenseMatrix& b, SketchParams params,
                             BuildStats* stats = nullptr);
SketchSet compressed_product(const SparseMatrix& a, const SparseMatrix& b, SketchParams params,
                             BuildStats* stats = nullptr);

/// Coefficientwise sum; requires identical dimensions, parameters and seed.
SketchSet sketch_add(const SketchSet& x, const SketchSet& y);
SketchSet sketch_scale(const SketchSet& x, double alpha);

/// Signed sum sketch of the outer product u*v^T:
/// (sum_i s1(i)u_i) * (sum_j s2(j)v_j).
double ams_outer_sketch(std::span<const double> u, std::span<const double> v,
                        const SignPair& signs);

}  // namespace cmm
