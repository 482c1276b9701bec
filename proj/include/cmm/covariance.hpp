#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cmm/recovery.hpp"
#include "cmm/sketch.hpp"

namespace cmm {

/// m observations of an n-variate random variable, one observation per
/// column of an n-by-m matrix.
struct SampleSet {
  DenseMatrix data;

  std::size_t variables() const { return data.rows(); }
  std::size_t observations() const { return data.cols(); }
};

enum class CsvOrientation { VariablesInRows, VariablesInColumns };

/// Reads comma-separated samples. A single leading header row is skipped if
/// its first field does not parse as a number. Ragged rows are rejected with
/// the offending row number.
SampleSet load_csv(const std::string& path,
                   CsvOrientation orientation = CsvOrientation::VariablesInRows);

/// Returns M = (A - mean*1) / sqrt(m-1), so that M*M^T is exactly the sample
/// covariance matrix.
DenseMatrix center_and_scale(const SampleSet& samples);

/// Sketch of the sample covariance matrix with its diagonal removed, plus
/// the exact diagonal.
class CovarianceSketch {
 public:
  CovarianceSketch(SketchSet sketch, std::vector<double> diagonal)
      : sketch_(std::move(sketch)), diagonal_(std::move(diagonal)) {}
  CovarianceSketch(RecoverableSketch sketch, std::vector<double> diagonal)
      : sketch_(std::move(sketch)), diagonal_(std::move(diagonal)) {}

  bool recoverable() const { return std::holds_alternative<RecoverableSketch>(sketch_); }
  const SketchSet& base() const {
    return recoverable() ? std::get<RecoverableSketch>(sketch_).base()
                         : std::get<SketchSet>(sketch_);
  }
  const RecoverableSketch& recoverable_sketch() const;

  std::span<const double> diagonal() const { return diagonal_; }

 private:
  std::variant<SketchSet, RecoverableSketch> sketch_;
  std::vector<double> diagonal_;
};

/// Subtracts s(i,i)*diag[i] from bucket h(i,i) of every repetition, turning a
/// sketch of Q into a sketch of Q with zeroed diagonal. The recoverable
/// variant applies the same subtraction to each masked family whose codeword
/// bit keeps index i.
void subtract_exact_diagonal(SketchSet& sk, std::span<const double> diag);
void subtract_exact_diagonal(RecoverableSketch& sk, std::span<const double> diag);

/// Builds the sketch of Q = M*M^T via one compressed product, computes the
/// diagonal exactly in O(nm), and removes it from the sketch.
CovarianceSketch sketch_covariance(const SampleSet& samples, SketchParams params,
                                   bool recoverable, BuildStats* stats = nullptr);

struct CorrelationHit {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  double estimate = 0.0;
};

/// Off-diagonal candidate pairs with |estimate| above the threshold, i < j,
/// sorted by |estimate| descending. Uses the code-based extraction when the
/// sketch is recoverable and a full n^2 scan otherwise.
std::vector<CorrelationHit> scan_correlations(const CovarianceSketch& sketch, double threshold,
                                              std::size_t entry_cap = kDefaultEntryCap);

}  // namespace cmm
