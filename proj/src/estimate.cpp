#include "cmm/estimate.hpp"

#include <bit>
#include <cmath>

#include "cmm/sketch.hpp"
#include "build_impl.hpp"

namespace cmm {

namespace {

constexpr std::uint64_t kLevelStream = std::uint64_t(1) << 33;
constexpr std::uint64_t kDiagLeftStream = std::uint64_t(1) << 34;
constexpr std::uint64_t kDiagRightStream = (std::uint64_t(1) << 34) + 1;
constexpr std::uint64_t kAmsStream = std::uint64_t(1) << 35;

// FFT residue floor; genuine nonzeros sit far above it after the random
// integer diagonal scaling.
constexpr double kZeroToleranceScale = 1e-7;

template <class Matrix>
NnzEstimate estimate_nnz_impl(const Matrix& a, const Matrix& b, std::uint32_t reps,
                              std::uint64_t seed) {
  if (reps < 1) throw dim_error("estimate_nnz: reps must be >= 1");
  if (a.cols() != b.rows()) throw dim_error("estimate_nnz: inner dimensions disagree");

  const DiagonalScaling left = random_diagonal(a.rows(), derive_seed(seed, kDiagLeftStream));
  const DiagonalScaling right = random_diagonal(b.cols(), derive_seed(seed, kDiagRightStream));
  const Matrix scaled_a = apply_diagonal_left(left, a);
  const Matrix scaled_b = apply_diagonal_right(b, right);

  const double tol =
      kZeroToleranceScale * std::max(1.0, frobenius_norm(scaled_a) * frobenius_norm(scaled_b));
  const std::size_t cap = std::bit_ceil(std::max<std::size_t>(2, 2 * a.rows() * b.cols()));

  NnzEstimate out;
  out.level_failure_bound = std::pow(0.75, reps);
  std::size_t level = 0;
  for (std::uint32_t buckets = 2;; buckets <<= 1, ++level) {
    SketchParams params;
    params.buckets = buckets;
    params.reps = reps;
    params.seed = derive_seed(seed, kLevelStream + level);
    const SketchSet sk = compressed_product(scaled_a, scaled_b, params);

    double min_zero_fraction = 1.0;
    bool all_pass = true;
    for (std::uint32_t t = 0; t < reps; ++t) {
      std::size_t zeros = 0;
      for (double c : sk.coefficients(t))
        if (std::abs(c) <= tol) ++zeros;
      min_zero_fraction = std::min(min_zero_fraction,
                                   static_cast<double>(zeros) / static_cast<double>(buckets));
      if (5 * zeros < 4ull * buckets) all_pass = false;
    }
    out.zero_fraction_per_level.push_back(min_zero_fraction);

    if (all_pass) {
      out.upper_bound = buckets;
      out.terminating_b = buckets;
      return out;
    }
    if (buckets >= cap) {
      out.upper_bound = buckets;
      out.terminating_b = buckets;
      out.capped = true;
      return out;
    }
  }
}

template <class Matrix>
FrobeniusEstimate estimate_frobenius_ub_impl(const Matrix& a, const Matrix& b, std::uint32_t reps,
                                             std::uint64_t seed) {
  if (reps < 1) throw dim_error("estimate_frobenius_ub: reps must be >= 1");
  if (a.cols() != b.rows()) throw dim_error("estimate_frobenius_ub: inner dimensions disagree");
  const auto cols = detail::LineSource::columns(a);
  const auto rows = detail::LineSource::rows(b);

  std::vector<double> squares(reps);
  for (std::uint32_t r = 0; r < reps; ++r) {
    const SignPair signs =
        new_sign_pair(derive_seed(seed, kAmsStream + r), SignIndependence::FourWise);
    double x = 0.0;
    for (std::size_t k = 0; k < cols.lines(); ++k) {
      if (cols.line_empty(k) || rows.line_empty(k)) continue;
      double su = 0.0, sv = 0.0;
      cols.for_each(k, [&](std::size_t i, double v) { su += signs.sign1(i) * v; });
      rows.for_each(k, [&](std::size_t j, double v) { sv += signs.sign2(j) * v; });
      x += su * sv;
    }
    squares[r] = x * x;
  }

  FrobeniusEstimate out;
  out.reps = reps;
  out.median_square = median_of(std::move(squares));
  out.upper_bound = 32.0 * out.median_square;
  return out;
}

}  // namespace

NnzEstimate estimate_nnz(const DenseMatrix& a, const DenseMatrix& b, std::uint32_t reps,
                         std::uint64_t seed) {
  return estimate_nnz_impl(a, b, reps, seed);
}

NnzEstimate estimate_nnz(const SparseMatrix& a, const SparseMatrix& b, std::uint32_t reps,
                         std::uint64_t seed) {
  return estimate_nnz_impl(a, b, reps, seed);
}

FrobeniusEstimate estimate_frobenius_ub(const DenseMatrix& a, const DenseMatrix& b,
                                        std::uint32_t reps, std::uint64_t seed) {
  return estimate_frobenius_ub_impl(a, b, reps, seed);
}

FrobeniusEstimate estimate_frobenius_ub(const SparseMatrix& a, const SparseMatrix& b,
                                        std::uint32_t reps, std::uint64_t seed) {
  return estimate_frobenius_ub_impl(a, b, reps, seed);
}

}  // namespace cmm
