#include "cmm/covariance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

namespace cmm {

SampleSet load_csv(const std::string& path, CsvOrientation orientation) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool parse_failed = false;
    while (std::getline(ss, cell, ',')) {
      // locale-independent: always a '.' decimal point
      const std::size_t first = cell.find_first_not_of(" \t");
      const std::size_t last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) {
        parse_failed = true;
        break;
      }
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data() + first, cell.data() + last + 1, v);
      if (ec != std::errc{} || end != cell.data() + last + 1) {
        parse_failed = true;
        break;
      }
      fields.push_back(v);
    }
    if (parse_failed) {
      if (!header_checked && rows.empty()) {
        header_checked = true;  // one header row allowed
        continue;
      }
      throw parse_error(path + ": row " + std::to_string(row_no) + ": non-numeric field");
    }
    header_checked = true;
    if (!rows.empty() && fields.size() != rows.front().size())
      throw parse_error(path + ": row " + std::to_string(row_no) + ": ragged row");
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw parse_error(path + ": no data rows");

  const std::size_t r = rows.size();
  const std::size_t c = rows.front().size();
  const bool vars_in_rows = orientation == CsvOrientation::VariablesInRows;
  DenseMatrix data(vars_in_rows ? r : c, vars_in_rows ? c : r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (vars_in_rows)
        data(i, j) = rows[i][j];
      else
        data(j, i) = rows[i][j];
    }
  return SampleSet{std::move(data)};
}

DenseMatrix center_and_scale(const SampleSet& samples) {
  const std::size_t n = samples.variables();
  const std::size_t m = samples.observations();
  if (m < 2) throw dim_error("center_and_scale: need at least two observations");
  DenseMatrix out(n, m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m - 1));
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t c = 0; c < m; ++c) mean += samples.data(i, c);
    mean /= static_cast<double>(m);
    for (std::size_t c = 0; c < m; ++c) out(i, c) = (samples.data(i, c) - mean) * scale;
  }
  return out;
}

const RecoverableSketch& CovarianceSketch::recoverable_sketch() const {
  if (!recoverable()) throw mode_error("covariance sketch is not recoverable");
  return std::get<RecoverableSketch>(sketch_);
}

void subtract_exact_diagonal(SketchSet& sk, std::span<const double> diag) {
  if (sk.n1() != sk.n3() || diag.size() != sk.n1())
    throw dim_error("subtract_exact_diagonal: diagonal length mismatch");
  for (std::uint32_t t = 0; t < sk.reps(); ++t) {
    const PairHashFamily& f = sk.families()[t];
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (diag[i] == 0.0) continue;
      sk.add_to_bucket(t, f.split(i, i), -f.sign(i, i) * diag[i]);
    }
  }
}

void subtract_exact_diagonal(RecoverableSketch& sk, std::span<const double> diag) {
  subtract_exact_diagonal(sk.base(), diag);
  const Code& row_code = sk.row_code();
  const Code& col_code = sk.col_code();
  const std::size_t ell_row = row_code.length();
  for (std::uint32_t t = 0; t < sk.base().reps(); ++t) {
    const PairHashFamily& f = sk.base().families()[t];
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (diag[i] == 0.0) continue;
      const std::size_t k = f.split(i, i);
      const double delta = -f.sign(i, i) * diag[i];
      for (std::size_t r = 0; r < ell_row; ++r)
        if (row_code.bit(i, r)) sk.add_to_masked_bucket(t, r, k, delta);
      for (std::size_t r = 0; r < col_code.length(); ++r)
        if (col_code.bit(i, r)) sk.add_to_masked_bucket(t, ell_row + r, k, delta);
    }
  }
}

CovarianceSketch sketch_covariance(const SampleSet& samples, SketchParams params,
                                   bool recoverable, BuildStats* stats) {
  const DenseMatrix centered = center_and_scale(samples);
  const DenseMatrix centered_t = centered.transposed();

  std::vector<double> diagonal(samples.variables(), 0.0);
  for (std::size_t i = 0; i < samples.variables(); ++i) {
    double q = 0.0;
    for (std::size_t c = 0; c < samples.observations(); ++c) q += centered(i, c) * centered(i, c);
    diagonal[i] = q;
  }

  if (recoverable) {
    RecoverableSketch sk = compressed_product_recoverable(centered, centered_t, params, stats);
    subtract_exact_diagonal(sk, diagonal);
    return CovarianceSketch(std::move(sk), std::move(diagonal));
  }
  SketchSet sk = compressed_product(centered, centered_t, params, stats);
  subtract_exact_diagonal(sk, diagonal);
  return CovarianceSketch(std::move(sk), std::move(diagonal));
}

std::vector<CorrelationHit> scan_correlations(const CovarianceSketch& sketch, double threshold,
                                              std::size_t entry_cap) {
  const SketchSet& base = sketch.base();
  const std::size_t n = base.n1();
  std::vector<CorrelationHit> hits;

  if (sketch.recoverable()) {
    const CandidateSet candidates =
        find_significant_entries(sketch.recoverable_sketch(), threshold);
    std::vector<std::pair<std::size_t, std::size_t>> seen;
    for (const Candidate& c : candidates.positions) {
      if (c.row == c.col) continue;
      const std::pair<std::size_t, std::size_t> key{std::min(c.row, c.col),
                                                    std::max(c.row, c.col)};
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      const double estimate = base.decompress_value(key.first, key.second);
      if (std::abs(estimate) > threshold)
        hits.push_back({key.first, key.second, estimate});
    }
  } else {
    if (n * n > entry_cap) throw cap_error("scan_correlations: full scan exceeds the memory cap");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double estimate = base.decompress_value(i, j);
        if (std::abs(estimate) > threshold) hits.push_back({i, j, estimate});
      }
  }

  std::sort(hits.begin(), hits.end(), [](const CorrelationHit& a, const CorrelationHit& b) {
    const double ma = std::abs(a.estimate), mb = std::abs(b.estimate);
    if (ma != mb) return ma > mb;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  return hits;
}

}  // namespace cmm
